#include "app.hpp"

int main(int argc, char** argv) { return eqmag::app::run_cli(argc, argv); }
