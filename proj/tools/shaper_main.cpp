#include "shaping/cli.hpp"

int main(int argc, char** argv) { return shaping::cli::run(argc, argv); }
