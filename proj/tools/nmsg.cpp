#include "nmsg/cli.hpp"

int main(int argc, char** argv) { return nmsg::cli::run(argc, argv); }
