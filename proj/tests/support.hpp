#pragma once

#include "zml/sample_cache.hpp"

namespace zml::test {

// Cache shared by all cases of one test binary, backed by $ZML_CACHE when set.
// Extended on demand and written back whenever it grew.
SampleCache& shared_cache(double t_max = 0.0);

}  // namespace zml::test
