// Command-line front end: rosen <validate|simulate|spectrum|localtime|verify> --config PATH.

#include "rosen/cli.hpp"

int main(int argc, char** argv) { return rosen::run_cli(argc, argv); }
