#include "softlex/cli.hpp"

int main(int argc, char** argv) { return softlex::cli::run(argc, argv); }
