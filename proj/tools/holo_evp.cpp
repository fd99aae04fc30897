#include "holo/cli.hpp"

int main(int argc, char** argv) { return holo::cli::run(argc, argv); }
