#include "mvdepth/cli.hpp"

int main(int argc, char** argv) { return mvdepth::cli::run(argc, argv); }
