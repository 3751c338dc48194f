#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fairslice/fixtures.hpp"
#include "fairslice/harness.hpp"

using namespace fairslice;

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<Property> parse_properties(const std::string& text) {
  if (text == "all") return {std::begin(kAllProperties), std::end(kAllProperties)};
  std::vector<Property> out;
  for (const auto& name : split_list(text)) out.push_back(parse_property(name));
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "no properties selected");
  return out;
}

std::vector<std::size_t> parse_indices(const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(text)) {
    try {
      std::size_t used = 0;
      auto v = std::stoul(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::InvalidArgument, "'" + item + "' is not an agent index");
    }
  }
  return out;
}

void emit(const json& doc, const std::string& path) {
  if (path.empty()) {
    std::cout << doc.dump(2) << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
  out << doc.dump(2) << "\n";
}

json error_json(const std::string& code, const std::string& message) {
  return {{"error", {{"code", code}, {"message", message}}}};
}

int exit_code_for(ErrorCode code) {
  return code == ErrorCode::Internal || code == ErrorCode::NoConvergence ? 3 : 2;
}

struct GenFlags {
  std::size_t n = 2;
  int max_blocks = 3;
  int ladder = 4;
  bool pw_uniform = false;
  std::uint64_t seed = 1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--n", n, "Number of agents")->check(CLI::PositiveNumber);
    cmd->add_option("--max-blocks", max_blocks, "Maximum segments per density")->check(CLI::PositiveNumber);
    cmd->add_option("--ladder", ladder, "Largest density value")->check(CLI::PositiveNumber);
    cmd->add_flag("--pw-uniform", pw_uniform, "Each agent uses a single positive level");
    cmd->add_option("--seed", seed, "Generator seed");
  }
  GeneratorOptions options(std::uint64_t offset = 0) const {
    return {.agents = n, .max_blocks = max_blocks, .ladder = ladder, .pw_uniform = pw_uniform, .seed = seed + offset};
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fair cake division under piecewise constant valuations"};
  app.require_subcommand(1);

  std::string profile_path, out_path, props = "all";

  auto* run = app.add_subcommand("run", "Run one mechanism and report the allocation and its properties");
  RunRequest req;
  std::string perm, coords = "original";
  bool no_disposal = false;
  run->add_option("--alg", req.algorithm, "ccea|mea|csd|crsd|cmsd|uniform")->required()
      ->check(CLI::IsMember(algorithm_names()));
  run->add_option("--profile", profile_path, "Profile JSON")->required();
  run->add_option("--seed", req.seed, "Seed for cmsd rotations and crsd orders");
  run->add_option("--perm", perm, "crsd order, comma-separated 0-based indices");
  run->add_option("--sample", req.samples, "crsd: average over this many sampled orders");
  run->add_flag("--exact", req.exact, "mea: exact equilibrium");
  run->add_option("--tol,--tolerance", req.tolerance, "mea: iterative tolerance")->check(CLI::PositiveNumber);
  run->add_flag("--no-disposal", no_disposal, "csd family: keep cake nobody wants");
  run->add_option("--coords", coords, "original|rescaled")->check(CLI::IsMember({"original", "rescaled"}));
  run->add_option("--props", props, "all or a comma-separated list");
  run->add_option("-o,--output", out_path, "Write the report here instead of stdout");

  auto* check = app.add_subcommand("check", "Certify or refute properties of a given allocation");
  std::string alloc_path, slack = "0";
  check->add_option("--profile", profile_path, "Profile JSON")->required();
  check->add_option("--allocation", alloc_path, "Allocation JSON (a run report also works)")->required();
  check->add_option("--props", props, "all or a comma-separated list");
  check->add_option("--slack", slack, "Tolerated shortfall, as a rational");
  check->add_option("-o,--output", out_path, "Write the report here instead of stdout");

  auto* compare = app.add_subcommand("compare", "Utility differences between two mechanisms");
  std::string alg1, alg2;
  std::size_t trials = 1;
  bool cmp_exact = false;
  double cmp_tol = 1e-9;
  GenFlags cmp_gen;
  compare->add_option("--alg1", alg1, "First mechanism")->required()->check(CLI::IsMember(algorithm_names()));
  compare->add_option("--alg2", alg2, "Second mechanism")->required()->check(CLI::IsMember(algorithm_names()));
  compare->add_option("--profile", profile_path, "Profile JSON; otherwise random profiles are generated");
  compare->add_option("--trials", trials, "Generated profiles")->check(CLI::PositiveNumber);
  compare->add_flag("--exact", cmp_exact, "mea: exact equilibrium");
  compare->add_option("--tol,--tolerance", cmp_tol, "mea: iterative tolerance")->check(CLI::PositiveNumber);
  cmp_gen.attach(compare);

  auto* manipulate = app.add_subcommand("manipulate", "Search for a profitable misreport");
  std::string mech_name = "ccea", coalition_text;
  std::vector<std::size_t> agents;
  MisreportSpace space;
  bool uniform_reports = false;
  manipulate->add_option("--alg", mech_name, "ccea|mea|csd|cmsd|uniform")->check(CLI::IsMember(mechanism_names()));
  manipulate->add_option("--profile", profile_path, "Profile JSON")->required();
  manipulate->add_option("--agent", agents, "Deviating agent index (repeatable)");
  manipulate->add_option("--coalition", coalition_text, "Comma-separated agent indices");
  manipulate->add_option("--grid", space.grid, "Breakpoint lattice 1/G")->check(CLI::PositiveNumber);
  manipulate->add_option("--ladder", space.ladder, "Largest reported value")->check(CLI::PositiveNumber);
  manipulate->add_option("--budget", space.budget, "Maximum deviations evaluated")->check(CLI::PositiveNumber);
  manipulate->add_option("--seed", space.seed, "Seed for random reports");
  manipulate->add_option("--threads", space.threads, "Worker threads");
  manipulate->add_flag("--uniform-reports", uniform_reports, "Only piecewise uniform reports");
  manipulate->add_option("-o,--output", out_path, "Write the result here instead of stdout");

  auto* gen = app.add_subcommand("gen", "Generate a random profile");
  GenFlags gen_flags;
  gen_flags.attach(gen);
  gen->add_option("-o,--output", out_path, "Write the profile here instead of stdout");

  auto* fixtures = app.add_subcommand("fixtures", "Run the golden fixtures");
  std::string fixture_dir = FAIRSLICE_FIXTURE_DIR;
  fixtures->add_option("--dir", fixture_dir, "Fixture directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cout << error_json("InvalidArgument", e.what()).dump() << "\n";
    return 2;
  }

  try {
    if (*run) {
      auto profile = io::load_profile(profile_path);
      if (!perm.empty()) req.permutation = parse_indices(perm);
      if ((req.permutation || req.samples > 0) && req.algorithm != "crsd")
        throw Error(ErrorCode::InvalidArgument, "--perm and --sample apply to crsd only");
      req.free_disposal = !no_disposal;
      req.rescaled = coords == "rescaled";
      req.properties = parse_properties(props);
      auto report = run_report(profile, req);
      emit(report.document, out_path);
      return 0;
    }
    if (*check) {
      auto profile = io::load_profile(profile_path);
      json doc;
      try {
        doc = json::parse(io::read_file(alloc_path));
      } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedDocument, std::string("allocation is not valid JSON: ") + e.what());
      }
      auto alloc = io::allocation_from_json(doc, profile);
      CheckOptions options{parse_rational(slack)};
      if (options.slack < 0) throw Error(ErrorCode::InvalidArgument, "slack must be non-negative");
      auto reports = check_all(profile, alloc, options, parse_properties(props));
      json out{{"utilities", utilities_to_json(profile, utilities_of(profile, alloc))},
               {"properties", properties_to_json(profile, reports)}};
      emit(out, out_path);
      return std::any_of(reports.begin(), reports.end(), [](const auto& r) { return r.failed(); }) ? 1 : 0;
    }
    if (*compare) {
      std::vector<Profile> profiles;
      if (!profile_path.empty()) {
        profiles.push_back(io::load_profile(profile_path));
      } else {
        for (std::size_t t = 0; t < trials; ++t) profiles.push_back(generate_profile(cmp_gen.options(t)));
      }
      RunRequest first{.algorithm = alg1, .exact = cmp_exact, .tolerance = cmp_tol};
      RunRequest second{.algorithm = alg2, .exact = cmp_exact, .tolerance = cmp_tol};
      auto cmp = compare_utilities(profiles, first, second);
      json diff = json::array();
      for (const auto& d : cmp.difference) diff.push_back(exact_and_decimal(d));
      std::cout << json{{"alg1", alg1}, {"alg2", alg2}, {"trials", cmp.trials}, {"difference", diff},
                        {"max_abs", exact_and_decimal(cmp.max_abs)}}.dump(2)
                << "\n";
      return 0;
    }
    if (*manipulate) {
      auto profile = io::load_profile(profile_path);
      auto coalition = agents;
      for (auto i : parse_indices(coalition_text)) coalition.push_back(i);
      if (uniform_reports) space.kind = ReportKind::PiecewiseUniform;
      auto search = find_manipulation(mechanism(mech_name), profile, coalition, space);
      json names = json::array();
      for (auto i : coalition) names.push_back(profile[i].name);
      json out{{"mechanism", mech_name}, {"coalition", names}, {"evaluated", search.evaluated},
               {"exhaustive", search.exhaustive}, {"found", search.found.has_value()}};
      if (search.found) {
        json reports = json::array(), truthful = json::array(), deviating = json::array();
        for (std::size_t k = 0; k < coalition.size(); ++k) {
          reports.push_back(io::density_to_json(search.found->reports[k]));
          truthful.push_back(exact_and_decimal(search.found->truthful[k]));
          deviating.push_back(exact_and_decimal(search.found->deviating[k]));
        }
        out["reports"] = reports;
        out["truthful"] = truthful;
        out["deviating"] = deviating;
      }
      emit(out, out_path);
      return 0;
    }
    if (*gen) {
      emit(io::profile_to_json(generate_profile(gen_flags.options())), out_path);
      return 0;
    }
    if (*fixtures) {
      auto outcomes = run_fixture_dir(fixture_dir);
      bool ok = !outcomes.empty();
      for (const auto& o : outcomes) {
        std::cout << (o.passed() ? "PASS " : "FAIL ") << o.name << " (" << o.checks << " checks)\n";
        for (const auto& f : o.failures) std::cout << "  " << f << "\n";
        ok = ok && o.passed();
      }
      return ok ? 0 : 1;
    }
  } catch (const Error& e) {
    std::cout << error_json(to_string(e.code()), e.what()).dump() << "\n";
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    std::cout << error_json("MalformedDocument", e.what()).dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cout << error_json("Internal", e.what()).dump() << "\n";
    return 3;
  }
  return 3;
}
