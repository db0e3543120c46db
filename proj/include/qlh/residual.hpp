#pragma once

#include <map>
#include <string>

#include "qlh/field.hpp"

namespace qlh {

struct Norms {
    double l2 = 0.0;
    double linf = 0.0;
    double rel = 0.0;  // l2 / (L2 of the largest constituent term)
};

/// Per-time-slice norms of a pointwise identity violation. Scalar residuals
/// keep the raw field; vector residuals keep the component field and both
/// norm the pointwise magnitude. Norms are reported over the density mask
/// and over the whole box.
struct ResidualReport {
    double t = 0.0;
    int slice = -1;

    Norms masked;
    Norms unmasked;
    double denom_masked = 0.0;    // largest constituent-term L2 on the mask
    double denom_unmasked = 0.0;
    double mask_fraction = 1.0;

    std::string check;        // continuity | euler | momentum | lighthill | ...
    std::string convention;   // sign convention label, empty if not applicable
    double c0 = 0.0;
    double dt = 0.0;          // snapshot spacing used by the time stencil
    double h = 0.0;           // largest grid spacing

    std::map<std::string, double> term_l2;  // constituent-term L2 (masked)

    RealField field;          // scalar residual (or magnitude for vector ones)
    VectorField vector_field; // populated for vector residuals
};

namespace detail {

/// Fills norms of a scalar residual field given the constituent-term L2s.
inline void finalize_scalar_report(ResidualReport& r, const BoolField& mask) {
    r.masked.l2 = masked_l2_norm(r.field, mask);
    r.masked.linf = masked_linf_norm(r.field, mask);
    r.unmasked.l2 = l2_norm(r.field);
    r.unmasked.linf = linf_norm(r.field);
    r.masked.rel = r.denom_masked > 0.0 ? r.masked.l2 / r.denom_masked : 0.0;
    r.unmasked.rel = r.denom_unmasked > 0.0 ? r.unmasked.l2 / r.denom_unmasked : 0.0;
    r.mask_fraction = mask.fraction();
}

}  // namespace detail

}  // namespace qlh
