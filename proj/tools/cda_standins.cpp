// Regenerates the stand-in input rasters shipped in data/.
#include <CLI11.hpp>

#include <iostream>

#include "cda/scenarios.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write the stand-in permeability, source and initial-condition rasters"};
  std::string dir = "data";
  std::size_t n = 240;
  std::uint64_t seed = cda::standin_seed;
  app.add_option("--dir", dir, "output directory");
  app.add_option("--n", n, "raster cells per side");
  app.add_option("--seed", seed, "permeability seed");
  CLI11_PARSE(app, argc, argv);
  cda::Example3Data::generate(n, seed).save(dir);
  std::cout << "wrote " << dir << "/ex3_{permeability,source,initial}.raster\n";
  return 0;
}
