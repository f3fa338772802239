#include "sps/record_io.hpp"

#include <json.hpp>

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sps {

using nlohmann::json;

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

namespace {

json body(const SolutionRecord &rec, const ConfigEcho &config) {
  const RadialGrid &g = rec.u.grid();
  const auto &e = rec.breakdown;
  const auto &r = rec.residuals;
  json j;
  j["schema_version"] = record_schema_version;
  j["p"] = rec.p;
  j["mu"] = rec.mu;
  j["grid"] = {{"n", g.intervals()}, {"r_max", g.r_max()}, {"gamma", g.gamma()}};
  j["method"] = rec.method;
  j["iterations"] = rec.iterations;
  j["node_count"] = rec.node_count;
  j["b_level"] = rec.b_level;
  j["on_manifold"] = rec.on_manifold;
  j["grad_tol"] = rec.grad_tol;
  j["duplicate"] = rec.duplicate;
  j["wrong_branch"] = rec.wrong_branch;
  j["breakdown"] = {{"A", e.A}, {"B", e.B}, {"C", e.C},    {"I", e.I},
                    {"J", e.J}, {"M", e.M}, {"normE", e.normE}};
  j["residuals"] = {{"gradient", r.gradient},
                    {"nehari_normalized", r.nehari_normalized},
                    {"pohozaev_normalized", r.pohozaev_normalized},
                    {"tail_magnitude", r.tail_magnitude}};
  j["config"] = config;
  j["u"] = std::vector<double>(rec.u.values().begin(), rec.u.values().end());
  j["phi"] =
      std::vector<double>(rec.phi.values().begin(), rec.phi.values().end());
  return j;
}

const json &field(const json &j, const std::string &path, const char *key,
                  json::value_t type) {
  const std::string where = path.empty() ? key : path + "." + key;
  auto it = j.find(key);
  if (it == j.end())
    throw SchemaError("record field '" + where + "' is missing");
  const bool ok =
      type == json::value_t::number_float
          ? it->is_number()
          : type == json::value_t::number_unsigned
                ? it->is_number_unsigned() ||
                      (it->is_number_integer() && it->get<long long>() >= 0)
                : type == json::value_t::number_integer
                      ? it->is_number_integer()
                      : it->type() == type;
  if (!ok)
    throw SchemaError("record field '" + where + "' has the wrong type");
  return *it;
}

double number(const json &j, const std::string &path, const char *key) {
  return field(j, path, key, json::value_t::number_float).get<double>();
}

std::vector<double> values(const json &j, const char *key, std::size_t n) {
  const json &a = field(j, "", key, json::value_t::array);
  if (a.size() != n)
    throw SchemaError("record field '" + std::string(key) + "' has " +
                      std::to_string(a.size()) + " values, grid needs " +
                      std::to_string(n));
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!a[i].is_number())
      throw SchemaError("record field '" + std::string(key) + "[" +
                        std::to_string(i) + "]' is not a number");
    v[i] = a[i].get<double>();
  }
  return v;
}

} // namespace

std::string record_to_json(const SolutionRecord &rec,
                           const ConfigEcho &config) {
  json j = body(rec, config);
  j["hash"] = fnv1a_hex(j.dump());
  return j.dump(1) + "\n";
}

StoredRecord record_from_json(const std::string &text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error &e) {
    throw SchemaError(std::string("record is not valid JSON: ") + e.what());
  }
  if (!j.is_object())
    throw SchemaError("record is not a JSON object");

  const auto version =
      field(j, "", "schema_version", json::value_t::number_integer)
          .get<long long>();
  if (version != record_schema_version)
    throw SchemaError("record schema_version " + std::to_string(version) +
                      " is not supported");

  StoredRecord out;
  SolutionRecord &rec = out.record;
  rec.p = number(j, "", "p");
  rec.mu = number(j, "", "mu");

  const json &gj = field(j, "", "grid", json::value_t::object);
  const auto n =
      field(gj, "grid", "n", json::value_t::number_unsigned).get<std::size_t>();
  const double r_max = number(gj, "grid", "r_max");
  const double gamma = number(gj, "grid", "gamma");
  GridPtr grid;
  try {
    grid = make_grid(n, r_max, gamma);
  } catch (const ConfigError &e) {
    throw SchemaError(std::string("record grid is invalid: ") + e.what());
  }

  rec.method = field(j, "", "method", json::value_t::string).get<std::string>();
  rec.iterations =
      field(j, "", "iterations", json::value_t::number_integer).get<int>();
  rec.node_count =
      field(j, "", "node_count", json::value_t::number_integer).get<int>();
  rec.b_level = number(j, "", "b_level");
  rec.on_manifold =
      field(j, "", "on_manifold", json::value_t::boolean).get<bool>();
  rec.grad_tol = number(j, "", "grad_tol");
  rec.duplicate = field(j, "", "duplicate", json::value_t::boolean).get<bool>();
  rec.wrong_branch =
      field(j, "", "wrong_branch", json::value_t::boolean).get<bool>();

  const json &bj = field(j, "", "breakdown", json::value_t::object);
  auto &e = rec.breakdown;
  e.p = rec.p;
  e.mu = rec.mu;
  e.A = number(bj, "breakdown", "A");
  e.B = number(bj, "breakdown", "B");
  e.C = number(bj, "breakdown", "C");
  e.I = number(bj, "breakdown", "I");
  e.J = number(bj, "breakdown", "J");
  e.M = number(bj, "breakdown", "M");
  e.normE = number(bj, "breakdown", "normE");

  const json &rj = field(j, "", "residuals", json::value_t::object);
  auto &r = rec.residuals;
  r.gradient = number(rj, "residuals", "gradient");
  r.nehari_normalized = number(rj, "residuals", "nehari_normalized");
  r.pohozaev_normalized = number(rj, "residuals", "pohozaev_normalized");
  r.tail_magnitude = number(rj, "residuals", "tail_magnitude");

  if (auto it = j.find("config"); it != j.end()) {
    if (!it->is_object())
      throw SchemaError("record field 'config' has the wrong type");
    for (const auto &[k, v] : it->items()) {
      if (!v.is_string())
        throw SchemaError("record field 'config." + k + "' is not a string");
      out.config[k] = v.get<std::string>();
    }
  }

  try {
    rec.u = RadialField(grid, values(j, "u", grid->size()));
    rec.phi = RadialField(grid, values(j, "phi", grid->size()));
  } catch (const DomainError &ex) {
    throw SchemaError(std::string("record values are invalid: ") + ex.what());
  }

  out.hash = field(j, "", "hash", json::value_t::string).get<std::string>();
  json unhashed = j;
  unhashed.erase("hash");
  out.hash_ok = fnv1a_hex(unhashed.dump()) == out.hash;
  return out;
}

void write_atomic(const std::filesystem::path &path, const std::string &data) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os)
      throw Error("cannot open " + tmp.string() + " for writing");
    os << data;
    os.flush();
    if (!os)
      throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_record(const std::filesystem::path &path, const SolutionRecord &rec,
                  const ConfigEcho &config) {
  write_atomic(path, record_to_json(rec, config));
}

StoredRecord read_record(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw SchemaError("cannot open record " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return record_from_json(ss.str());
}

std::string profile_csv(const SolutionRecord &rec) {
  const RadialGrid &g = rec.u.grid();
  std::string out = "r,u,phi\n";
  char line[96];
  for (std::size_t i = 0; i < g.size(); ++i) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", g.r(i), rec.u[i],
                  rec.phi[i]);
    out += line;
  }
  return out;
}

void write_profile(const std::filesystem::path &path,
                   const SolutionRecord &rec) {
  write_atomic(path, profile_csv(rec));
}

} // namespace sps
