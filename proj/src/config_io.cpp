#include "aircran/config_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace aircran {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Cuts a trailing comment, respecting double-quoted strings.
std::string strip_comment(const std::string& line) {
  bool in_quote = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (c == '"') in_quote = !in_quote;
    if (c == '#' && !in_quote) return line.substr(0, i);
  }
  return line;
}

double parse_number(const std::string& text, const std::string& key) {
  const char* begin = text.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || trim(std::string(end)) != "")
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  return v;
}

std::vector<std::string> split_list(const std::string& text,
                                    const std::string& key) {
  std::string t = trim(text);
  if (t.size() < 2 || t.front() != '[' || t.back() != ']')
    throw ConfigError(key + ": expected a bracketed list, got '" + text + "'");
  std::string inner = t.substr(1, t.size() - 2);
  std::vector<std::string> out;
  std::string cur;
  bool in_quote = false;
  for (char c : inner) {
    if (c == '"') in_quote = !in_quote;
    if (c == ',' && !in_quote) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty()) out.push_back(trim(cur));
  return out;
}

std::string unquote(const std::string& s, const std::string& key) {
  std::string t = trim(s);
  if (t.size() >= 2 && t.front() == '"' && t.back() == '"')
    return t.substr(1, t.size() - 2);
  if (!t.empty() && t.front() != '"') return t;  // bare word
  throw ConfigError(key + ": malformed string '" + s + "'");
}

}  // namespace

KeyValueFile KeyValueFile::parse_string(const std::string& text) {
  KeyValueFile kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(strip_comment(line));
    if (s.empty()) continue;
    std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected 'key = value', got '" + s + "'");
    std::string key = trim(s.substr(0, eq));
    std::string val = trim(s.substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    kv.entries_[key] = val;
  }
  return kv;
}

KeyValueFile KeyValueFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

bool KeyValueFile::has(const std::string& key) const {
  return entries_.count(key) > 0;
}

double KeyValueFile::get_real(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError(key + ": missing required key");
  return parse_number(it->second, key);
}

double KeyValueFile::get_real_or(const std::string& key,
                                 double fallback) const {
  return has(key) ? get_real(key) : fallback;
}

long long KeyValueFile::get_int(const std::string& key) const {
  double v = get_real(key);
  long long i = static_cast<long long>(std::llround(v));
  if (static_cast<double>(i) != v)
    throw ConfigError(key + ": expected an integer");
  return i;
}

long long KeyValueFile::get_int_or(const std::string& key,
                                   long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::string KeyValueFile::get_string(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError(key + ": missing required key");
  return unquote(it->second, key);
}

std::string KeyValueFile::get_string_or(const std::string& key,
                                        const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

std::vector<double> KeyValueFile::get_real_list(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError(key + ": missing required key");
  std::vector<double> out;
  for (const auto& item : split_list(it->second, key))
    out.push_back(parse_number(item, key));
  return out;
}

std::vector<std::string> KeyValueFile::get_string_list(
    const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError(key + ": missing required key");
  std::vector<std::string> out;
  for (const auto& item : split_list(it->second, key))
    out.push_back(unquote(item, key));
  return out;
}

VectorXd KeyValueFile::get_per_device(const std::string& key, int K) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError(key + ": missing required key");
  std::string v = trim(it->second);
  if (!v.empty() && v.front() == '[') {
    auto list = get_real_list(key);
    if (static_cast<int>(list.size()) == 1)
      return VectorXd::Constant(K, list[0]);
    if (static_cast<int>(list.size()) != K)
      throw ConfigError(key + ": expected 1 or " + std::to_string(K) +
                        " entries, got " + std::to_string(list.size()));
    return Eigen::Map<const VectorXd>(list.data(), K);
  }
  return VectorXd::Constant(K, parse_number(v, key));
}

SystemConfig config_from_file(const KeyValueFile& kv) {
  SystemConfig cfg;
  cfg.K = static_cast<int>(kv.get_int("K"));
  cfg.M = static_cast<int>(kv.get_int("M"));
  cfg.N = static_cast<int>(kv.get_int("N"));
  cfg.D = static_cast<int>(kv.get_int("D"));
  cfg.L = static_cast<int>(kv.get_int("L"));
  cfg.fronthaul_capacity = kv.get_real("fronthaul_capacity");
  cfg.max_precoding_power = kv.get_per_device("max_precoding_power", cfg.K);
  cfg.energy_budget = kv.get_real("energy_budget");
  cfg.slot_duration = kv.get_real("slot_duration");
  cfg.signal_second_moment = kv.has("signal_second_moment")
                                 ? kv.get_per_device("signal_second_moment", cfg.K)
                                 : VectorXd::Ones(cfg.K);
  if (kv.has("awgn_power")) {
    cfg.awgn_power = kv.get_real("awgn_power");
  } else {
    // PSD route: dBm/Hz plus noise figure, integrated over the bandwidth.
    double psd = kv.get_real_or("noise_psd_dbm_hz", -169.0);
    double nf = kv.get_real_or("noise_figure_db", 7.0);
    double bw = kv.get_real_or("bandwidth_hz", 1e6);
    cfg.awgn_power = std::pow(10.0, (psd + nf) / 10.0) * 1e-3 * bw;
  }
  cfg.sensing_noise_power = kv.has("sensing_noise_power")
                                ? kv.get_per_device("sensing_noise_power", cfg.K)
                                : VectorXd::Zero(cfg.K);
  cfg.rng_seed = static_cast<std::uint64_t>(kv.get_int_or("rng_seed", 1));
  return validate_config(cfg);
}

namespace {

void write_block(std::ostream& out, const char* name, const double* data,
                 int rows, int cols) {
  out << name << ' ' << rows << ' ' << cols << '\n';
  char buf[64];
  // Column-major, hexfloat: exact round-trip.
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) {
      std::snprintf(buf, sizeof(buf), "%a", data[j * rows + i]);
      out << buf << (i + 1 == rows ? '\n' : ' ');
    }
  }
}

MatrixXd read_block(std::istream& in, const std::string& expect) {
  std::string name;
  int rows = 0, cols = 0;
  if (!(in >> name >> rows >> cols))
    throw ConfigError("design file: truncated block header (expected '" +
                      expect + "')");
  if (name != expect)
    throw ConfigError("design file: expected block '" + expect + "', got '" +
                      name + "'");
  if (rows < 0 || cols < 0)
    throw ConfigError("design file: bad dimensions for block '" + name + "'");
  MatrixXd m(rows, cols);
  std::string tok;
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) {
      if (!(in >> tok))
        throw ConfigError("design file: truncated data in block '" + name +
                          "'");
      m(i, j) = std::strtod(tok.c_str(), nullptr);
    }
  return m;
}

}  // namespace

void save_design(const DesignSolution& sol, std::ostream& out) {
  const int K = sol.devices();
  const int D = sol.dims();
  const int MN = static_cast<int>(sol.quantization_diag.size());
  out << "aircran-design 1\n";
  write_block(out, "receive_strength", sol.receive_strength.data(), K, D);
  // Beamformers as a 2MN x D real block: [Re; Im] per column.
  MatrixXd mt(2 * MN, D);
  for (int d = 0; d < D; ++d) {
    mt.col(d).head(MN) = sol.beamformers[static_cast<std::size_t>(d)].real();
    mt.col(d).tail(MN) = sol.beamformers[static_cast<std::size_t>(d)].imag();
  }
  write_block(out, "beamformers", mt.data(), 2 * MN, D);
  write_block(out, "quantization_diag", sol.quantization_diag.data(), MN, 1);
  write_block(out, "aux_gain", sol.aux_gain.data(),
              static_cast<int>(sol.aux_gain.size()), 1);
  write_block(out, "aux_energy", sol.aux_energy.data(), K, D);
}

DesignSolution load_design(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "aircran-design" || version != 1)
    throw ConfigError("design file: bad magic/version");
  DesignSolution sol;
  sol.receive_strength = read_block(in, "receive_strength");
  MatrixXd mt = read_block(in, "beamformers");
  const int D = static_cast<int>(mt.cols());
  const int MN = static_cast<int>(mt.rows()) / 2;
  sol.beamformers.resize(static_cast<std::size_t>(D));
  for (int d = 0; d < D; ++d) {
    VectorXcd m(MN);
    m.real() = mt.col(d).head(MN);
    m.imag() = mt.col(d).tail(MN);
    sol.beamformers[static_cast<std::size_t>(d)] = m;
  }
  MatrixXd q = read_block(in, "quantization_diag");
  sol.quantization_diag = q.col(0);
  MatrixXd a = read_block(in, "aux_gain");
  sol.aux_gain = a.col(0);
  sol.aux_energy = read_block(in, "aux_energy");
  return sol;
}

void save_design_file(const DesignSolution& sol, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  save_design(sol, out);
}

DesignSolution load_design_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open design file '" + path + "'");
  return load_design(in);
}

}  // namespace aircran
