#pragma once

#include "fujitalab/grid.hpp"

namespace fujitalab {

/// Lebesgue norm by rectangle-rule quadrature: (sum |u_j|^p cv)^(1/p) for
/// finite p, max_j |u_j| for p = infinity (a distinguished value, not a
/// limit). Throws for p < 1.
double lp_norm(const RealField& u, double p);

/// Signed integral sum u_j * cell_volume.
double mass(const RealField& u);

}  // namespace fujitalab
