#include "cli.hpp"

int main(int argc, char** argv) { return sparselvq::cli::run(argc, argv); }
