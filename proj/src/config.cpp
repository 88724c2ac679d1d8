#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "tgsta/experiments.hpp"

namespace tgsta {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string> split(std::string_view s, char sep = ',') {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  T value{};
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end || s.empty()) {
    throw std::invalid_argument("config: '" + std::string(key) + "' expects a number, got '" + s +
                                "'");
  }
  return value;
}

template <typename T>
std::vector<T> parse_list(std::string_view key, std::string_view text) {
  std::vector<T> out;
  for (const auto& item : split(text)) out.push_back(parse_number<T>(key, item));
  return out;
}

bool parse_bool(std::string_view key, std::string_view text) {
  const auto s = lower(trim(text));
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw std::invalid_argument("config: '" + std::string(key) + "' expects true/false");
}

template <typename T>
void require_increasing(const std::vector<T>& v, const char* what) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) {
      throw std::invalid_argument(std::string("config: ") + what + " must be strictly increasing");
    }
  }
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::ostringstream s;
  s.precision(17);
  for (std::size_t i = 0; i < v.size(); ++i) s << (i ? "," : "") << v[i];
  return s.str();
}

std::string number(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

std::vector<double> logspace(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) {
    throw std::invalid_argument("config: t_f_logspace needs 0 < lo < hi and count >= 2");
  }
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] =
        std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (count - 1));
  }
  out.back() = hi;
  return out;
}

}  // namespace

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::Fig1: return "fig1";
    case Scenario::Fig2: return "fig2";
    case Scenario::Fig3: return "fig3";
    case Scenario::Fig4: return "fig4";
    case Scenario::Fig5: return "fig5";
    case Scenario::Custom: return "custom";
  }
  return "custom";
}

Scenario parse_scenario(std::string_view text) {
  const auto s = lower(trim(text));
  for (auto v : {Scenario::Fig1, Scenario::Fig2, Scenario::Fig3, Scenario::Fig4, Scenario::Fig5,
                 Scenario::Custom}) {
    if (s == to_string(v)) return v;
  }
  throw std::invalid_argument("config: unknown scenario '" + std::string(text) + "'");
}

std::string_view to_string(RampChoice r) {
  switch (r) {
    case RampChoice::Ermakov: return "sta";
    case RampChoice::Reference: return "ref";
    case RampChoice::VariationalTF: return "tf";
    case RampChoice::VariationalGaussian: return "gauss";
  }
  return "ref";
}

RampChoice parse_ramp_choice(std::string_view text) {
  const auto s = lower(trim(text));
  if (s == "sta" || s == "ermakov") return RampChoice::Ermakov;
  if (s == "ref" || s == "reference") return RampChoice::Reference;
  if (s == "tf" || s == "thomas-fermi") return RampChoice::VariationalTF;
  if (s == "gauss" || s == "g" || s == "gaussian") return RampChoice::VariationalGaussian;
  throw std::invalid_argument("config: unknown ramp '" + std::string(text) + "'");
}

GridSpec parse_grid_spec(std::string_view text) {
  const auto parts = split(text);
  if (parts.size() != 3) throw std::invalid_argument("config: grid expects XMIN,XMAX,N");
  GridSpec g;
  g.x_min = parse_number<double>("grid", parts[0]);
  g.x_max = parse_number<double>("grid", parts[1]);
  g.n_points = parse_number<std::size_t>("grid", parts[2]);
  (void)g.make();  // validates
  return g;
}

void RunConfig::validate() const {
  if (N < 1) throw std::invalid_argument("config: N must be >= 1");
  if (!(gamma >= 0.0)) throw std::invalid_argument("config: gamma must be >= 0");
  trap(t_f).validate();
  for (double t : t_f_grid) trap(t).validate();
  require_increasing(t_f_grid, "t_f grid");
  require_increasing(n_grid, "N grid");
  require_increasing(gamma_grid, "gamma grid");
  for (int n : n_grid) {
    if (n < 1) throw std::invalid_argument("config: N grid entries must be >= 1");
  }
  for (double g : gamma_grid) {
    if (!(g >= 0.0)) throw std::invalid_argument("config: gamma grid entries must be >= 0");
  }
  if (dt && !(*dt > 0.0)) throw std::invalid_argument("config: dt must be positive");
  for (auto r : ramp_choices()) {
    if (r == RampChoice::Ermakov && gamma != 0.0) {
      throw std::invalid_argument("config: the Ermakov ramp requires gamma = 0");
    }
  }
  (void)grid.make();
}

TrapSpec RunConfig::trap(double ramp_time) const {
  return TrapSpec{omega0_sq, omegaf_sq, gamma, ramp_time};
}

std::vector<double> RunConfig::durations() const {
  return t_f_grid.empty() ? std::vector<double>{t_f} : t_f_grid;
}

std::vector<int> RunConfig::particle_numbers() const {
  return n_grid.empty() ? std::vector<int>{N} : n_grid;
}

std::vector<RampChoice> RunConfig::ramp_choices() const {
  if (!ramps.empty()) return ramps;
  if (gamma == 0.0) return {RampChoice::Ermakov, RampChoice::Reference};
  return {RampChoice::VariationalTF, RampChoice::VariationalGaussian, RampChoice::Reference};
}

RunConfig preset(Scenario s) {
  RunConfig c;
  c.scenario = s;
  std::vector<int> even_n;
  for (int n = 2; n <= 30; n += 2) even_n.push_back(n);
  switch (s) {
    case Scenario::Fig1:
      c.N = 10;
      c.gamma = 0.0;
      break;
    case Scenario::Fig2:
      c.N = 10;
      c.gamma = 0.0;
      c.t_f_grid = logspace(0.1, 10.0, 25);
      c.ramps = {RampChoice::Ermakov, RampChoice::Reference};
      c.mean_field = true;
      break;
    case Scenario::Fig3:
      c.N = 30;
      c.gamma = 0.25;
      c.n_grid = even_n;
      for (int i = 0; i <= 20; ++i) c.gamma_grid.push_back(0.05 * i);
      break;
    case Scenario::Fig4:
      c.N = 30;
      c.gamma = 0.25;
      c.t_f_grid = logspace(0.1, 10.0, 25);
      c.ramps = {RampChoice::VariationalTF, RampChoice::VariationalGaussian, RampChoice::Reference};
      c.mean_field = false;
      break;
    case Scenario::Fig5:
      c.gamma = 0.25;
      c.n_grid = even_n;
      c.t_f_grid = {1.0, std::sqrt(2.0)};
      c.ramps = {RampChoice::VariationalTF, RampChoice::VariationalGaussian, RampChoice::Reference};
      c.mean_field = false;
      break;
    case Scenario::Custom:
      break;
  }
  return c;
}

void apply_setting(RunConfig& c, std::string_view raw_key, std::string_view value) {
  const std::string key = lower(trim(raw_key));
  if (key == "scenario") {
    c.scenario = parse_scenario(value);
  } else if (key == "n") {
    c.N = parse_number<int>(key, value);
  } else if (key == "gamma") {
    c.gamma = parse_number<double>(key, value);
  } else if (key == "omega0_sq") {
    c.omega0_sq = parse_number<double>(key, value);
  } else if (key == "omegaf_sq") {
    c.omegaf_sq = parse_number<double>(key, value);
  } else if (key == "t_f") {
    c.t_f = parse_number<double>(key, value);
  } else if (key == "t_f_list") {
    c.t_f_grid = parse_list<double>(key, value);
  } else if (key == "t_f_logspace") {
    const auto p = split(value);
    if (p.size() != 3) throw std::invalid_argument("config: t_f_logspace expects lo,hi,count");
    c.t_f_grid = logspace(parse_number<double>(key, p[0]), parse_number<double>(key, p[1]),
                          parse_number<int>(key, p[2]));
  } else if (key == "n_list") {
    c.n_grid = parse_list<int>(key, value);
  } else if (key == "n_range") {
    const auto p = parse_list<int>(key, value);
    if (p.size() != 3 || p[2] < 1 || p[1] < p[0]) {
      throw std::invalid_argument("config: n_range expects lo,hi,step with lo <= hi, step >= 1");
    }
    c.n_grid.clear();
    for (int n = p[0]; n <= p[1]; n += p[2]) c.n_grid.push_back(n);
  } else if (key == "gamma_list") {
    c.gamma_grid = parse_list<double>(key, value);
  } else if (key == "ramps") {
    c.ramps.clear();
    for (const auto& r : split(value)) c.ramps.push_back(parse_ramp_choice(r));
  } else if (key == "ansatz") {
    c.ansatz = parse_ansatz(trim(value));
  } else if (key == "mean_field") {
    c.mean_field = parse_bool(key, value);
  } else if (key == "grid") {
    c.grid = parse_grid_spec(value);
  } else if (key == "dt") {
    const auto v = lower(trim(value));
    if (v == "auto" || v.empty()) {
      c.dt.reset();
    } else {
      c.dt = parse_number<double>(key, value);
    }
  } else if (key == "out") {
    c.out_dir = trim(value);
  } else if (key == "threads") {
    c.threads = parse_number<std::size_t>(key, value);
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "snapshot_interval") {
    c.snapshot_interval = parse_number<std::size_t>(key, value);
  } else {
    throw std::invalid_argument("config: unknown key '" + std::string(raw_key) + "'");
  }
}

std::vector<std::pair<std::string, std::string>> read_settings(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int number_of_line = 0;
  while (std::getline(in, line)) {
    ++number_of_line;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(number_of_line) +
                                  ": expected key = value");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> read_settings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path.string());
  return read_settings(in);
}

std::vector<std::pair<std::string, std::string>> describe(const RunConfig& c) {
  std::vector<std::string> ramps;
  for (auto r : c.ramp_choices()) ramps.emplace_back(to_string(r));
  std::string ramp_list;
  for (std::size_t i = 0; i < ramps.size(); ++i) ramp_list += (i ? "," : "") + ramps[i];
  return {
      {"scenario", std::string(to_string(c.scenario))},
      {"N", std::to_string(c.N)},
      {"gamma", number(c.gamma)},
      {"omega0_sq", number(c.omega0_sq)},
      {"omegaf_sq", number(c.omegaf_sq)},
      {"t_f", number(c.t_f)},
      {"t_f_list", join(c.t_f_grid)},
      {"n_list", join(c.n_grid)},
      {"gamma_list", join(c.gamma_grid)},
      {"ramps", ramp_list},
      {"ansatz", std::string(to_string(c.ansatz))},
      {"mean_field", c.mean_field ? "true" : "false"},
      {"grid", number(c.grid.x_min) + "," + number(c.grid.x_max) + "," +
                   std::to_string(c.grid.n_points)},
      {"dt", c.dt ? number(*c.dt) : "auto"},
      {"out", c.out_dir},
      {"threads", std::to_string(c.threads)},
      {"seed", std::to_string(c.seed)},
      {"snapshot_interval", std::to_string(c.snapshot_interval)},
  };
}

}  // namespace tgsta
