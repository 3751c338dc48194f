#include <iostream>

#include "fairslice/fairness.hpp"
#include "fairslice/harness.hpp"
#include "fairslice/io.hpp"

using namespace fairslice;

int main() {
  auto profile = io::parse_profile(R"({"agents":[
    {"name":"alice","density":{"breakpoints":["0","1/10","1/2","1"],"values":["10","0","2"]}},
    {"name":"bob","density":{"breakpoints":["0","3/10","1"],"values":["0","3"]}}]})");

  for (const char* alg : {"ccea", "mea", "csd"}) {
    RunRequest req{.algorithm = alg, .exact = true};
    auto result = run_algorithm(profile, req);
    std::cout << alg << ":";
    for (std::size_t i = 0; i < profile.size(); ++i)
      std::cout << " " << profile[i].name << "=" << to_string(result.utilities[i]);
    std::cout << "\n";
    for (const auto& r : check_all(profile, result.allocation))
      std::cout << "  " << to_string(r.property) << ": " << to_string(r.verdict) << "\n";
  }

  std::cout << io::allocation_to_json(run_ccea(profile)).dump(2) << "\n";
}
