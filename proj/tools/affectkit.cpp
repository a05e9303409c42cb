#include "affectkit/cli.hpp"

int main(int argc, char** argv) { return affectkit::cli::run(argc, argv); }
