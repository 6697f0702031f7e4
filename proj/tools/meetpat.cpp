#include "meetpat/cli.hpp"

int main(int argc, char** argv) {
    return meetpat::cli::run(argc, argv);
}
