#include "commands.hpp"

int main(int argc, char** argv) { return geomimu::cli::run(argc, argv); }
