#include "bqproc/cli.hpp"

int main(int argc, char** argv) { return bqproc::cli::run(argc, argv); }
