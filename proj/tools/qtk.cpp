#include <iostream>

#include "qtk/cli.hpp"
#include "qtk/parallel.hpp"

int main(int argc, char** argv) {
    try {
        qtk::blas_self_check();
    } catch (const std::exception& e) {
        std::cerr << "qtk: " << e.what() << "\n";
        return 3;
    }
    return qtk::cli::main_entry(argc, argv);
}
