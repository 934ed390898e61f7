#pragma once

#include "dimgp/dataset.hpp"

#include <cstdint>
#include <string>

namespace dimgp {

/// Bundled generators for self-contained experiments.
///   line     - 1-d segment embedded in ambient_dim with Gaussian jitter
///   plane    - 2-d patch embedded in ambient_dim with Gaussian jitter
///   planted  - iid uniform features, target from a named formula
///   embedded - latent_dim uniform latents mapped linearly into ambient_dim
///              (first latent_dim features are the latents themselves),
///              target from a named formula of the latents
enum class SynthKind { Line, Plane, Planted, Embedded };

SynthKind synth_kind_from_name(const std::string& name);
const char* synth_kind_name(SynthKind k);

/// Formulas: linear, product, product_sin, sum_squares, mixed.
struct SynthConfig {
    SynthKind kind = SynthKind::Planted;
    int n = 500;
    int ambient_dim = 5;
    int latent_dim = 3;          // embedded only
    double noise = 0.0;          // target noise stddev
    double jitter = 1e-6;        // feature jitter stddev (line/plane/embedded)
    double box_half = 3.0;       // features/latents drawn uniform on [-box_half, box_half]
    std::string formula = "product_sin";
    std::uint64_t seed = 0;
};

Dataset make_synthetic(const SynthConfig& cfg);

} // namespace dimgp
