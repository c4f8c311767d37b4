#include "support.hpp"

namespace zml::test {

SampleCache& shared_cache(double t_max) {
    static const auto path = SampleCache::resolve_path(std::nullopt);
    static SampleCache cache = SampleCache::open(path);
    if (t_max > cache.covered_up_to()) {
        cache.ensure(t_max);
        if (path) cache.save(*path);
    }
    return cache;
}

}  // namespace zml::test
