#include "dispersion/cli.hpp"

int main(int argc, char** argv) { return dispersion::cli::run(argc, argv); }
