#include "cli.hpp"

int main(int argc, char** argv) { return gcica::cli::run(argc, argv); }
