#include "faithfill/cli/app.hpp"

int main(int argc, char** argv) { return faithfill::cli::dispatch(argc, argv); }
