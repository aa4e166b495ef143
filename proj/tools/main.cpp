#include "service.hpp"

int main(int argc, char** argv) { return eigencurve::cli::run(argc, argv); }
