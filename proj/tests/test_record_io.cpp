#include <doctest.h>

#include "sps/errors.hpp"
#include "sps/record_io.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace sps;
namespace fs = std::filesystem;

namespace {

const SolutionRecord &sample_record() {
  static const SolutionRecord rec = [] {
    SolverConfig c;
    c.grid.n = 1024;
    c.grid.r_max = 60.0;
    return minimize_on_manifold(c);
  }();
  return rec;
}

fs::path scratch_dir(const std::string &name) {
  fs::path d = fs::temp_directory_path() / ("sps_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string schema_error(const std::string &text) {
  try {
    record_from_json(text);
  } catch (const SchemaError &e) {
    return e.what();
  }
  return "";
}

} // namespace

TEST_CASE("fnv1a reference vectors") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("record round trip is bit exact") {
  const auto &rec = sample_record();
  const ConfigEcho echo{{"p", "3"}, {"command", "test"}};
  const auto stored = record_from_json(record_to_json(rec, echo));
  const auto &r = stored.record;
  CHECK(stored.hash_ok);
  CHECK(stored.config == echo);
  CHECK(r.p == rec.p);
  CHECK(r.mu == rec.mu);
  CHECK(r.method == rec.method);
  CHECK(r.iterations == rec.iterations);
  CHECK(r.node_count == rec.node_count);
  CHECK(r.b_level == rec.b_level);
  CHECK(r.on_manifold == rec.on_manifold);
  CHECK(r.grad_tol == rec.grad_tol);
  CHECK(r.breakdown.A == rec.breakdown.A);
  CHECK(r.breakdown.B == rec.breakdown.B);
  CHECK(r.breakdown.C == rec.breakdown.C);
  CHECK(r.breakdown.I == rec.breakdown.I);
  CHECK(r.breakdown.normE == rec.breakdown.normE);
  CHECK(r.residuals.gradient == rec.residuals.gradient);
  CHECK(r.residuals.pohozaev_normalized == rec.residuals.pohozaev_normalized);
  CHECK(r.residuals.tail_magnitude == rec.residuals.tail_magnitude);
  CHECK(r.u.grid().r_max() == rec.u.grid().r_max());
  REQUIRE(r.u.size() == rec.u.size());
  bool same = true;
  for (std::size_t i = 0; i < r.u.size(); ++i)
    same = same && r.u[i] == rec.u[i] && r.phi[i] == rec.phi[i] &&
           r.u.grid().r(i) == rec.u.grid().r(i);
  CHECK(same);
  CHECK(record_to_json(r, echo) == record_to_json(rec, echo));
}

TEST_CASE("schema violations are named") {
  const std::string good = record_to_json(sample_record());
  auto edit = [&](auto f) {
    auto j = nlohmann::json::parse(good);
    f(j);
    return j.dump();
  };
  CHECK(schema_error(good.substr(0, good.size() / 2)).find("not valid JSON") !=
        std::string::npos);
  CHECK(schema_error("[1, 2]").find("not a JSON object") != std::string::npos);
  CHECK(schema_error(edit([](auto &j) { j.erase("mu"); })).find("'mu'") !=
        std::string::npos);
  CHECK(schema_error(edit([](auto &j) { j["grid"].erase("gamma"); }))
            .find("'grid.gamma'") != std::string::npos);
  CHECK(schema_error(edit([](auto &j) { j["method"] = 3; })).find("'method'") !=
        std::string::npos);
  CHECK(schema_error(edit([](auto &j) { j["u"].erase(0); })).find("'u'") !=
        std::string::npos);
  CHECK(schema_error(edit([](auto &j) { j["phi"][5] = "x"; })).find("'phi[5]'") !=
        std::string::npos);
  CHECK(schema_error(edit([](auto &j) { j["schema_version"] = 99; }))
            .find("schema_version") != std::string::npos);
  CHECK(schema_error(edit([](auto &j) { j["grid"]["n"] = 4; }))
            .find("grid") != std::string::npos);
}

TEST_CASE("hash detects edits") {
  auto j = nlohmann::json::parse(record_to_json(sample_record()));
  j["u"][10] = j["u"][10].get<double>() * 1.01;
  const auto stored = record_from_json(j.dump());
  CHECK_FALSE(stored.hash_ok);
}

TEST_CASE("files") {
  const auto dir = scratch_dir("record_io");
  const auto &rec = sample_record();
  SUBCASE("record file") {
    const fs::path file = dir / "sub" / "rec.json";
    write_record(file, rec);
    CHECK(fs::exists(file));
    CHECK_FALSE(fs::exists(dir / "sub" / "rec.json.tmp"));
    CHECK(read_record(file).record.mu == rec.mu);
    CHECK_THROWS_AS(read_record(dir / "missing.json"), SchemaError);
  }
  SUBCASE("profile csv") {
    const fs::path file = dir / "rec.csv";
    write_profile(file, rec);
    std::ifstream is(file);
    std::string line;
    std::getline(is, line);
    CHECK(line == "r,u,phi");
    std::size_t rows = 0;
    std::getline(is, line);
    ++rows;
    {
      std::istringstream ss(line);
      double r, u, phi;
      char c1, c2;
      ss >> r >> c1 >> u >> c2 >> phi;
      CHECK(r == 0.0);
      CHECK(u == rec.u[0]);
      CHECK(phi == rec.phi[0]);
    }
    while (std::getline(is, line))
      ++rows;
    CHECK(rows == rec.u.size());
  }
  fs::remove_all(dir);
}
