#pragma once

#include "qtk/linops.hpp"
#include "qtk/quasiprob.hpp"

namespace qtk::detail {

CMat projector(const CMat& O, int sign);
CMat mul(const CMat& a, const CMat& b);
cplx trace_product(const CMat& a, const CMat& b);

// Coarse table for V and rho diagonal, given X = W(t), the diagonal of V (entries
// +-1) and the diagonal of rho.
CoarseTable coarse_diagonal(const CMat& X, const RVec& vdiag, const RVec& rdiag);

}  // namespace qtk::detail
