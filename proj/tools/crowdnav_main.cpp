#include "crowdnav/experiments.hpp"

int main(int argc, char** argv) { return crowdnav::cli_main(argc, argv); }
