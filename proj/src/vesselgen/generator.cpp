#include "vesselgen/generator.hpp"

#include "vesselgen/errors.hpp"
#include "vesselgen/rng.hpp"

#include <stdexcept>

namespace vesselgen {

namespace {

bool acceptable(const VesselTree& t) {
    if (t.size() < 2) return false;
    for (const auto& a : t.attrs) {
        if (!(a.r > 0.0)) return false;
    }
    return true;
}

} // namespace

GenerationResult sample_trees(const RvnnModel<float>& model, const NormParams& norm, int n,
                              std::uint64_t seed, int max_depth) {
    if (n <= 0) throw std::runtime_error("sample_trees: n must be > 0");
    GenerationResult res;
    res.trees.reserve(n);
    const long cap = 10L * n;
    long attempt = 0;
    while (static_cast<int>(res.trees.size()) < n) {
        if (attempt >= cap)
            throw NumericalError("sample_trees: retry cap exceeded (" +
                                     std::to_string(res.rejected) +
                                     " rejected draws); the model is degenerate");
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
        ++attempt;
        const auto z = draw_eps<float>(model.cfg.latent_dim, rng);
        const VesselTree normalized = decode_free(model, z, max_depth);
        VesselTree raw = denormalize(normalized, norm);
        if (!acceptable(raw)) {
            ++res.rejected;
            continue;
        }
        validate(raw);
        res.trees.push_back(std::move(raw));
    }
    return res;
}

} // namespace vesselgen
