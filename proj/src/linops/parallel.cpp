#include "qtk/parallel.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

#include <cblas.h>

#include "qtk/linops.hpp"

extern "C" void openblas_set_num_threads(int);
extern "C" char* openblas_get_corename();

namespace qtk {

int default_threads() {
    if (const char* env = std::getenv("QTK_THREADS")) {
        int t = std::atoi(env);
        if (t > 0) return t;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
}

void single_threaded_blas() { openblas_set_num_threads(1); }

void blas_self_check() {
    const int n = 256;
    SeededRng rng(0xb1a5);
    RMat a(n, n), b(n, n), c(n, n);
    for (Eigen::Index k = 0; k < a.size(); ++k) {
        a.data()[k] = rng.uniform(-1, 1);
        b.data()[k] = rng.uniform(-1, 1);
    }
    cblas_dgemm(CblasColMajor, CblasNoTrans, CblasNoTrans, n, n, n, 1.0, a.data(), n, b.data(), n, 0.0, c.data(), n);
    RMat ref = a.lazyProduct(b);
    double err = (c - ref).cwiseAbs().maxCoeff();
    if (!(err < 1e-10))
        throw std::runtime_error(std::string("BLAS self-check failed (dgemm error ") + std::to_string(err) +
                                 ", core " + openblas_get_corename() + "); set OPENBLAS_CORETYPE=Haswell");
}

}  // namespace qtk
