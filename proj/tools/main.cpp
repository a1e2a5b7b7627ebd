#include "lesionseg/cli.hpp"

int main(int argc, char** argv) { return lesionseg::cli::run(argc, argv); }
