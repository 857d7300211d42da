#include "tavr/cli.hpp"

int main(int argc, char** argv) { return tavr::cli::run(argc, argv); }
