#include <pwab/cli.hpp>

int main(int argc, char** argv) { return pwab::cli::run(argc, argv); }
