#include "modsurf/cli.hpp"

int main(int argc, char** argv) { return modsurf::cli::run(argc, argv); }
