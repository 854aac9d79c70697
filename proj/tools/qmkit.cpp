#include "qmkit/cli.hpp"

int main(int argc, char** argv) { return qmkit::cli::run(argc, argv); }
