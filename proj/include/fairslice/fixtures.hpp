#pragma once

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairslice/harness.hpp"

// Golden fixture files: a profile plus an "expect" block of runs, literal
// allocations, misreports and cross-valuation checks.
namespace fairslice {

struct FixtureOutcome {
  std::string name;
  std::vector<std::string> failures;
  std::size_t checks = 0;

  bool passed() const { return failures.empty(); }
};

namespace detail {

inline std::size_t agent_index(const Profile& profile, const json& node) {
  if (node.is_number_unsigned()) {
    auto i = node.get<std::size_t>();
    if (i < profile.size()) return i;
  } else if (node.is_string()) {
    auto names = profile.names();
    auto it = std::find(names.begin(), names.end(), node.get<std::string>());
    if (it != names.end()) return static_cast<std::size_t>(it - names.begin());
  }
  throw Error(ErrorCode::MalformedDocument, "fixture names an unknown agent: " + node.dump());
}

class FixtureChecker {
 public:
  FixtureChecker(FixtureOutcome& out, std::string where) : out_(out), where_(std::move(where)) {}

  void expect(bool ok, const std::string& what) {
    ++out_.checks;
    if (!ok) out_.failures.push_back(where_ + ": " + what);
  }

  void utilities(const Profile& profile, const json& expected, const std::vector<Rational>& got) {
    if (expected.size() != got.size()) {
      expect(false, "expected " + std::to_string(expected.size()) + " utilities");
      return;
    }
    for (std::size_t i = 0; i < got.size(); ++i) {
      if (expected[i].is_null()) continue;
      auto want = io::number_from(expected[i], where_);
      expect(got[i] == want, profile[i].name + " utility " + to_string(got[i]) + " != " + to_string(want));
    }
  }

  void properties(const Profile& profile, const json& expected, const Allocation& alloc, const CheckOptions& opts) {
    AllocationView view(profile, alloc);
    std::vector<PropertyReport> all;
    for (auto p : kAllProperties) all.push_back(check_property(p, view, opts));
    for (auto it = expected.begin(); it != expected.end(); ++it) {
      auto p = parse_property(it.key());
      const auto& report = all[static_cast<std::size_t>(p)];
      expect(to_string(report.verdict) == it.value().get<std::string>(),
             it.key() + " is " + to_string(report.verdict) + ", expected " + it.value().get<std::string>());
      if (report.failed()) expect(replay(profile, alloc, report), it.key() + " witness does not replay");
    }
    auto broken = lattice_violations(view, all);
    expect(broken.empty(), broken.empty() ? "" : "implication violated: " + broken.front());
  }

  void witness(const Profile& profile, const json& expected, const Allocation& alloc) {
    auto p = parse_property(expected.at("property").get<std::string>());
    AllocationView view(profile, alloc);
    auto report = check_property(p, view);
    auto got = witness_to_json(profile, report.witness);
    for (auto it = expected.begin(); it != expected.end(); ++it) {
      if (it.key() == "property") continue;
      expect(got.is_object() && got.contains(it.key()) && got.at(it.key()) == it.value(),
             "witness field " + it.key() + " is " + (got.is_object() && got.contains(it.key()) ? got.at(it.key()).dump() : "missing"));
    }
  }

 private:
  FixtureOutcome& out_;
  std::string where_;
};

inline RunRequest request_from(const json& run) {
  RunRequest req;
  req.algorithm = run.at("alg").get<std::string>();
  if (run.contains("seed")) req.seed = run.at("seed").get<std::uint64_t>();
  if (run.contains("perm")) req.permutation = run.at("perm").get<std::vector<std::size_t>>();
  if (run.contains("exact")) req.exact = run.at("exact").get<bool>();
  if (run.contains("no_disposal")) req.free_disposal = !run.at("no_disposal").get<bool>();
  return req;
}

}  // namespace detail

inline FixtureOutcome run_fixture(const json& doc, const std::string& label) {
  FixtureOutcome out{doc.value("name", label), {}, 0};
  const Profile profile = io::profile_from_json(doc.at("profile"));
  const json& expect = doc.at("expect");

  if (expect.contains("runs"))
    for (const auto& run : expect.at("runs")) {
      auto req = detail::request_from(run);
      detail::FixtureChecker check(out, "run " + run.dump());
      auto res = run_algorithm(profile, req);
      if (run.contains("utilities")) check.utilities(profile, run.at("utilities"), res.utilities);
      if (run.contains("pieces"))
        for (auto it = run.at("pieces").begin(); it != run.at("pieces").end(); ++it) {
          auto i = detail::agent_index(profile, json(it.key()));
          check.expect(normalize(res.allocation.pieces[i]) == normalize(io::piece_from_json(it.value(), it.key())),
                       it.key() + " piece differs");
        }
      if (run.contains("properties")) check.properties(profile, run.at("properties"), res.allocation, res.check);
      if (run.contains("witness")) check.witness(profile, run.at("witness"), res.allocation);
    }

  if (expect.contains("allocations"))
    for (const auto& entry : expect.at("allocations")) {
      detail::FixtureChecker check(out, "allocation " + entry.at("allocation").dump());
      auto alloc = io::allocation_from_json(entry.at("allocation"), profile);
      if (entry.contains("utilities")) check.utilities(profile, entry.at("utilities"), utilities_of(profile, alloc));
      if (entry.contains("properties")) check.properties(profile, entry.at("properties"), alloc, {});
    }

  if (expect.contains("manipulations"))
    for (const auto& entry : expect.at("manipulations")) {
      detail::FixtureChecker check(out, "manipulation " + entry.value("mechanism", std::string()));
      auto mech = mechanism(entry.at("mechanism").get<std::string>());
      std::vector<std::size_t> coalition;
      for (const auto& a : entry.at("coalition")) coalition.push_back(detail::agent_index(profile, a));
      if (entry.contains("reports")) {
        Profile reported = profile;
        for (std::size_t k = 0; k < coalition.size(); ++k)
          reported = reported.with_density(coalition[k], io::density_from_json(entry.at("reports")[k], "report"));
        auto honest = utilities_of(profile, mech(profile));
        auto lying = utilities_of(profile, mech(reported));
        bool weak = true, strict = false;
        for (auto i : coalition) {
          weak = weak && lying[i] >= honest[i];
          strict = strict || lying[i] > honest[i];
        }
        check.expect((weak && strict) == entry.value("gain", true), "scripted misreport gain mismatch");
        if (entry.contains("deviating")) {
          std::vector<Rational> got;
          for (auto i : coalition) got.push_back(lying[i]);
          for (std::size_t k = 0; k < got.size(); ++k)
            check.expect(got[k] == io::number_from(entry.at("deviating")[k], "deviating"),
                         "deviating utility " + to_string(got[k]));
        }
      }
      if (entry.value("search", false)) {
        auto search = find_manipulation(mech, profile, coalition);
        check.expect(search.found.has_value(), "search found no manipulation");
      }
    }

  // value of an agent's piece under another density, e.g. a deviation chain
  if (expect.contains("valuations"))
    for (const auto& entry : expect.at("valuations")) {
      detail::FixtureChecker check(out, "valuation " + entry.at("alg").get<std::string>());
      auto res = run_algorithm(profile, detail::request_from(entry));
      auto i = detail::agent_index(profile, entry.at("agent"));
      auto v = value_of(io::density_from_json(entry.at("density"), "valuation"), res.allocation.pieces[i]);
      if (entry.contains("equals")) check.expect(v == io::number_from(entry.at("equals"), "equals"), "value " + to_string(v));
      if (entry.contains("greater_than"))
        check.expect(v > io::number_from(entry.at("greater_than"), "greater_than"), "value " + to_string(v));
    }
  return out;
}

inline std::vector<FixtureOutcome> run_fixture_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error(ErrorCode::InvalidArgument, "fixture directory '" + dir + "' not found");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<FixtureOutcome> out;
  for (const auto& f : files) {
    json doc;
    try {
      doc = json::parse(io::read_file(f.string()));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedDocument, f.filename().string() + ": " + e.what());
    }
    out.push_back(run_fixture(doc, f.stem().string()));
  }
  return out;
}

}  // namespace fairslice
