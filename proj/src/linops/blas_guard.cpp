// Linked into every executable. OpenBLAS 0.3.20 picks its Cooperlake kernels on
// AVX512-BF16 CPUs, and their DGEMM returns wrong products above ~100x100. The
// kernel is chosen from OPENBLAS_CORETYPE when the library loads, and libc
// resets the environment after .preinit_array runs, so the process re-executes
// itself once with the variable set.
#include <unistd.h>

#include <cstring>
#include <vector>

namespace {

void select_blas_core(int, char** argv, char** envp) {
    for (char** e = envp; *e; ++e)
        if (std::strncmp(*e, "OPENBLAS_CORETYPE=", 18) == 0) return;
    __builtin_cpu_init();
    const char* core = nullptr;
    if (__builtin_cpu_supports("avx512f"))
        core = "OPENBLAS_CORETYPE=SkylakeX";
    else if (__builtin_cpu_supports("avx2"))
        core = "OPENBLAS_CORETYPE=Haswell";
    if (!core) return;
    std::vector<char*> env;
    for (char** e = envp; *e; ++e) env.push_back(*e);
    env.push_back(const_cast<char*>(core));
    env.push_back(nullptr);
    execve("/proc/self/exe", argv, env.data());
    // exec failed: carry on with the autodetected kernels
}

}  // namespace

__attribute__((section(".preinit_array"), used)) static void (*qtk_preinit)(int, char**, char**) = select_blas_core;
