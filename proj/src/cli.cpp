#include "ved/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

#include "CLI11.hpp"
#include "ved/codes.hpp"
#include "ved/error.hpp"

namespace ved::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& why) {
  throw Error(ErrorKind::kInvalidConfig,
              key + " = '" + value + "': " + why);
}

long long to_integer(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size()) bad_value(key, value, "not an integer");
  return v;
}

double to_real(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size() || !std::isfinite(v)) {
    bad_value(key, value, "not a finite number");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad_value(key, value, "expected true or false");
}

std::string dashed(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

const std::vector<std::string> kCommands = {"ved", "code-ved", "min-list",
                                            "simulate", "sweep"};

std::string strategy_name(geometry::Strategy s) {
  return s == geometry::Strategy::kExhaustive ? "exhaustive" : "iterative";
}

codes::EnumerationBounds bounds_of(const RunConfig& c, bool unmerged) {
  return {c.max_weight, c.max_steps, unmerged};
}

listmin::SearchOptions search_of(const RunConfig& c) {
  listmin::SearchOptions opt;
  opt.window = c.window;
  opt.node_cap = c.node_cap;
  opt.mapping.symbol_energy = c.symbol_energy;
  opt.strategy = c.strategy;
  return opt;
}

sim::SimConfig sim_of(const RunConfig& c, double ebno) {
  sim::SimConfig s;
  s.code = codes::ConvCode::parse(c.code);
  s.decoder = c.decoder;
  s.list_size = c.decoder == sim::DecoderKind::kViterbi ? 1 : c.list_size;
  s.ebno_db = ebno;
  s.info_len = c.info_len;
  s.trials = c.trials;
  s.seed = c.seed;
  s.workers = c.workers;
  s.min_ved = c.min_ved;
  return s;
}

}  // namespace

Settings parse_config(std::istream& in) {
  Settings out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::kParse,
                  "config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    if (key.empty()) {
      throw Error(ErrorKind::kParse,
                  "config line " + std::to_string(line_no) + ": empty key");
    }
    out[key] = trim(std::string_view(body).substr(eq + 1));
  }
  return out;
}

const std::vector<std::string>& allowed_keys(std::string_view command) {
  static const std::map<std::string, std::vector<std::string>, std::less<>> keys = {
      {"ved", {"vectors", "strategy"}},
      {"code-ved",
       {"code", "list_size", "max_weight", "max_steps", "unmerged", "window",
        "node_cap", "symbol_energy", "strategy"}},
      {"min-list",
       {"code", "max_list", "max_weight", "max_steps", "window", "node_cap",
        "symbol_energy", "target", "strategy"}},
      {"simulate",
       {"code", "decoder", "list_size", "ebno", "trials", "info_len",
        "workers", "min_ved"}},
      {"sweep",
       {"code", "decoder", "list_size", "ebno_grid", "trials", "info_len",
        "workers", "min_ved", "svg"}},
  };
  const auto it = keys.find(command);
  if (it == keys.end()) {
    throw Error(ErrorKind::kInvalidConfig,
                "unknown command '" + std::string(command) + "'");
  }
  return it->second;
}

std::vector<double> parse_grid(std::string_view text) {
  const std::string s(text);
  const auto c1 = s.find(':');
  const auto c2 = c1 == std::string::npos ? c1 : s.find(':', c1 + 1);
  if (c2 == std::string::npos) bad_value("ebno_grid", s, "expected a:b:step");
  const double a = to_real("ebno_grid", s.substr(0, c1));
  const double b = to_real("ebno_grid", s.substr(c1 + 1, c2 - c1 - 1));
  const double step = to_real("ebno_grid", s.substr(c2 + 1));
  if (!(step > 0.0)) bad_value("ebno_grid", s, "step must be positive");
  std::vector<double> out;
  for (int k = 0;; ++k) {
    const double v = a + k * step;
    if (v > b + 1e-9 * step) break;
    out.push_back(v);
  }
  if (out.empty()) bad_value("ebno_grid", s, "grid is empty");
  return out;
}

RunConfig make_run_config(std::string_view command, const Settings& settings) {
  const auto& keys = allowed_keys(command);
  RunConfig c;
  c.command = std::string(command);
  for (const auto& [key, value] : settings) {
    if (key == "out") {
      c.out = value;
      continue;
    }
    if (key == "seed") {
      const long long v = to_integer(key, value);
      if (v < 0) bad_value(key, value, "must be >= 0");
      c.seed = static_cast<std::uint64_t>(v);
      continue;
    }
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw Error(ErrorKind::kInvalidConfig,
                  "unknown key '" + key + "' for " + std::string(command));
    }
    auto positive_int = [&](long long lo, long long hi) {
      const long long v = to_integer(key, value);
      if (v < lo || v > hi) {
        bad_value(key, value,
                  "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      }
      return v;
    };
    if (key == "code") {
      codes::ConvCode::parse(value);
      c.code = value;
    } else if (key == "vectors") {
      c.vectors = value;
    } else if (key == "svg") {
      c.svg = value;
    } else if (key == "strategy") {
      if (value == "exhaustive") {
        c.strategy = geometry::Strategy::kExhaustive;
      } else if (value == "iterative") {
        c.strategy = geometry::Strategy::kIterative;
      } else {
        bad_value(key, value, "expected exhaustive or iterative");
      }
    } else if (key == "list_size") {
      c.list_size = static_cast<int>(positive_int(1, sim::kMaxListSize));
    } else if (key == "max_list") {
      c.max_list = static_cast<int>(positive_int(1, sim::kMaxListSize));
    } else if (key == "max_weight") {
      c.max_weight = static_cast<int>(positive_int(0, 1 << 20));
    } else if (key == "max_steps") {
      c.max_steps = static_cast<int>(positive_int(1, codes::kMaxEventSteps));
    } else if (key == "unmerged") {
      c.unmerged = to_bool(key, value);
    } else if (key == "window") {
      c.window = positive_int(0, 1 << 20);
    } else if (key == "node_cap") {
      c.node_cap = static_cast<std::size_t>(positive_int(1, 1LL << 40));
    } else if (key == "symbol_energy") {
      c.symbol_energy = to_real(key, value);
      if (!(c.symbol_energy > 0.0)) bad_value(key, value, "must be positive");
    } else if (key == "target") {
      c.target = to_real(key, value);
      if (*c.target < 0.0) bad_value(key, value, "must be >= 0");
    } else if (key == "decoder") {
      c.decoder = sim::parse_decoder(value);
    } else if (key == "ebno") {
      c.ebno = to_real(key, value);
    } else if (key == "ebno_grid") {
      c.ebno_grid = parse_grid(value);
    } else if (key == "trials") {
      c.trials = static_cast<std::size_t>(positive_int(1000, 1LL << 40));
    } else if (key == "info_len") {
      c.info_len = static_cast<int>(positive_int(1, 1 << 20));
    } else if (key == "workers") {
      c.workers = static_cast<int>(positive_int(1, 1024));
    } else if (key == "min_ved") {
      c.min_ved = to_real(key, value);
      if (!(*c.min_ved > 0.0)) bad_value(key, value, "must be positive");
    }
  }
  if (command == "sweep" && c.ebno_grid.empty()) {
    throw Error(ErrorKind::kInvalidConfig, "sweep needs ebno_grid = a:b:step");
  }
  if (command == "ved" && c.vectors.empty()) {
    throw Error(ErrorKind::kInvalidConfig, "ved needs a vector file");
  }
  return c;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Subcommands

std::string run_ved(const RunConfig& config, std::istream& vectors) {
  const geometry::VedProblem problem =
      geometry::gram_of(geometry::read_vectors(vectors));
  const geometry::VedSolution sol = geometry::ved(problem, config.strategy);
  std::ostringstream os;
  os << "vectors=" << problem.size() << "\n";
  os << "strategy=" << strategy_name(config.strategy) << "\n";
  os << "ved=" << format_number(sol.ved) << "\n";
  os << "ved_sq=" << format_number(sol.ved_sq) << "\n";
  os << "rank=" << sol.rank << "\n";
  // Constraint numbers count vectors in file order, starting at 1.
  os << "active_set=";
  for (std::size_t a = 0; a < sol.active_set.size(); ++a) {
    os << (a ? "," : "") << sol.active_set[a] + 1;
  }
  os << "\nmultipliers=";
  for (std::size_t a = 0; a < sol.multipliers.size(); ++a) {
    os << (a ? "," : "") << format_number(sol.multipliers[a]);
  }
  os << "\nnearest_point=";
  bool first = true;
  for (const auto& [c, v] : sol.nearest_point.entries()) {
    os << (first ? "" : ",") << c << ":" << format_number(v);
    first = false;
  }
  os << "\n";
  return os.str();
}

std::string listmin_csv_header() { return "L,min_ved,exact,witness\n"; }

std::string listmin_csv_row(const listmin::ListSpec& spec) {
  return std::to_string(spec.list_size) + "," + format_number(spec.min_ved) +
         "," + (spec.exact ? "true" : "false") + "," +
         listmin::witness_to_string(spec.witness) + "\n";
}

std::string run_code_ved(const RunConfig& config) {
  const codes::ConvCode code = codes::ConvCode::parse(config.code);
  const codes::EventPool pool =
      codes::enumerate_pool(code, bounds_of(config, config.unmerged));
  const listmin::SearchOptions opt = search_of(config);
  std::string out = listmin_csv_header();
  for (int l = 1; l <= config.list_size; ++l) {
    out += listmin_csv_row(listmin::min_ved(pool, l, opt));
  }
  return out;
}

std::string run_min_list(const RunConfig& config) {
  const codes::ConvCode code = codes::ConvCode::parse(config.code);
  const listmin::ListSizeResult res = listmin::minimal_list_size(
      code, bounds_of(config, true), config.target, config.max_list,
      search_of(config));
  std::string out = listmin_csv_header();
  for (const auto& row : res.table) out += listmin_csv_row(row);
  out += "# minimal_list_size=" + std::to_string(res.list_size) +
         " target=" + format_number(res.target) + "\n";
  return out;
}

std::string sim_csv_header() {
  return "ebno_db,decoder,L,trials,ce_count,p_ce,ci95,asymptote\n";
}

std::string sim_csv_row(const sim::SimResult& r) {
  return format_number(r.ebno_db) + "," + std::string(sim::to_string(r.decoder)) +
         "," + std::to_string(r.list_size) + "," + std::to_string(r.trials) +
         "," + std::to_string(r.ce_count) + "," + format_number(r.p_ce) + "," +
         format_number(r.ci95) + "," + format_number(r.asymptote) + "\n";
}

std::string run_simulate(const RunConfig& config) {
  return sim_csv_header() + sim_csv_row(sim::simulate_ce(sim_of(config, config.ebno)));
}

SweepOutput run_sweep(const RunConfig& config) {
  if (config.ebno_grid.empty()) {
    throw Error(ErrorKind::kInvalidConfig, "empty E_b/N_0 grid");
  }
  sim::SimConfig base = sim_of(config, config.ebno_grid.front());
  sim::validate(base);
  if (!base.min_ved) {
    base.min_ved = sim::default_min_ved(
        base.code,
        base.decoder == sim::DecoderKind::kViterbi ? 1 : base.list_size);
  }
  std::vector<sim::SimResult> results;
  SweepOutput out;
  out.csv = sim_csv_header();
  for (double ebno : config.ebno_grid) {
    sim::SimConfig s = base;
    s.ebno_db = ebno;
    results.push_back(sim::simulate_ce(s));
    out.csv += sim_csv_row(results.back());
  }
  const std::string title = base.code.to_string() + ", " +
                            std::string(sim::to_string(base.decoder)) +
                            " L=" + std::to_string(base.list_size);
  out.svg = render_svg(results, title);
  return out;
}

// ---------------------------------------------------------------------------
// SVG

std::string render_svg(const std::vector<sim::SimResult>& results,
                       const std::string& title) {
  constexpr double kW = 640, kH = 440, kLeft = 70, kRight = 20, kTop = 40,
                   kBottom = 50;
  double xmin = results.empty() ? 0.0 : results.front().ebno_db;
  double xmax = xmin;
  double ymin = 1.0, ymax = 1e-300;
  for (const auto& r : results) {
    xmin = std::min(xmin, r.ebno_db);
    xmax = std::max(xmax, r.ebno_db);
    for (double v : {r.p_ce, r.p_ce + r.ci95, r.asymptote}) {
      if (v > 0.0) {
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
      }
    }
    if (r.p_ce - r.ci95 > 0.0) ymin = std::min(ymin, r.p_ce - r.ci95);
  }
  if (xmax <= xmin) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  double dlo = std::floor(std::log10(std::min(ymin, ymax)));
  double dhi = std::ceil(std::log10(std::max(ymin, ymax)));
  if (dhi <= dlo) dhi = dlo + 1;
  auto px = [&](double x) {
    return kLeft + (x - xmin) / (xmax - xmin) * (kW - kLeft - kRight);
  };
  auto py = [&](double y) {
    const double ly = std::log10(std::max(y, std::pow(10.0, dlo)));
    return kTop + (dhi - ly) / (dhi - dlo) * (kH - kTop - kBottom);
  };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
     << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW << " " << kH
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\">" << title
     << "</text>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\""
     << kW - kLeft - kRight << "\" height=\"" << kH - kTop - kBottom
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double d = dlo; d <= dhi; d += 1.0) {
    const double y = py(std::pow(10.0, d));
    os << "<line x1=\"" << kLeft << "\" x2=\"" << kW - kRight << "\" y1=\""
       << num(y) << "\" y2=\"" << num(y) << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(y + 4)
       << "\" text-anchor=\"end\">1e" << static_cast<int>(d) << "</text>\n";
  }
  for (const auto& r : results) {
    const double x = px(r.ebno_db);
    os << "<text x=\"" << num(x) << "\" y=\"" << kH - kBottom + 18
       << "\" text-anchor=\"middle\">" << format_number(r.ebno_db) << "</text>\n";
  }
  os << "<text x=\"" << (kLeft + kW - kRight) / 2 << "\" y=\"" << kH - 10
     << "\" text-anchor=\"middle\">Eb/N0 [dB]</text>\n";
  os << "<text x=\"16\" y=\"" << (kTop + kH - kBottom) / 2
     << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << (kTop + kH - kBottom) / 2 << ")\">P_CE</text>\n";

  os << "<polyline fill=\"none\" stroke=\"#c03030\" stroke-width=\"1.5\" points=\"";
  for (const auto& r : results) {
    if (r.asymptote > 0.0) os << num(px(r.ebno_db)) << "," << num(py(r.asymptote)) << " ";
  }
  os << "\"/>\n";
  for (const auto& r : results) {
    if (r.p_ce <= 0.0) continue;
    const double x = px(r.ebno_db);
    os << "<line x1=\"" << num(x) << "\" x2=\"" << num(x) << "\" y1=\""
       << num(py(r.p_ce + r.ci95)) << "\" y2=\"" << num(py(r.p_ce - r.ci95))
       << "\" stroke=\"#2050a0\"/>\n";
    os << "<circle cx=\"" << num(x) << "\" cy=\"" << num(py(r.p_ce))
       << "\" r=\"3.5\" fill=\"#2050a0\"/>\n";
  }
  os << "<text x=\"" << kW - kRight - 8 << "\" y=\"" << kTop + 16
     << "\" text-anchor=\"end\" fill=\"#2050a0\">simulated P_CE (95%)</text>\n";
  os << "<text x=\"" << kW - kRight - 8 << "\" y=\"" << kTop + 32
     << "\" text-anchor=\"end\" fill=\"#c03030\">Q(VED/sigma)</text>\n";
  os << "</svg>\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Entry point

int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Vector Euclidean distance analysis for list decoding"};
  app.fallthrough();
  app.require_subcommand(1);
  std::string config_path, out_path, seed;
  app.add_option("--config", config_path, "key = value settings file");
  app.add_option("--out", out_path, "write results here instead of stdout");
  app.add_option("--seed", seed, "simulation seed");

  std::map<std::string, std::map<std::string, std::string>> flags;
  std::map<std::string, CLI::App*> subs;
  const std::map<std::string, std::string> about = {
      {"ved", "VED of an explicit vector set"},
      {"code-ved", "minimum VED over L-subsets of code error events"},
      {"min-list", "smallest list size reaching the free-distance asymptote"},
      {"simulate", "Monte Carlo codeword-error rate at one Eb/N0"},
      {"sweep", "Monte Carlo over an Eb/N0 grid, CSV and SVG"},
  };
  for (const auto& cmd : kCommands) {
    CLI::App* sub = app.add_subcommand(cmd, about.at(cmd));
    subs[cmd] = sub;
    for (const auto& key : allowed_keys(cmd)) {
      std::string names = "--" + dashed(key);
      if (key == "list_size") names += ",-L";
      if (key == "vectors") names = key + ",--vectors";
      sub->add_option(names, flags[cmd][key]);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    std::string cmd;
    for (const auto& [name, sub] : subs) {
      if (sub->parsed()) cmd = name;
    }
    Settings settings;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) {
        throw Error(ErrorKind::kInvalidConfig, "cannot read " + config_path);
      }
      settings = parse_config(in);
    }
    for (const auto& key : allowed_keys(cmd)) {
      const std::string opt = key == "vectors" ? "vectors" : "--" + dashed(key);
      if (subs[cmd]->count(opt) > 0) settings[key] = flags[cmd][key];
    }
    if (app.count("--out") > 0) settings["out"] = out_path;
    if (app.count("--seed") > 0) settings["seed"] = seed;
    const RunConfig config = make_run_config(cmd, settings);

    std::string text;
    std::string svg;
    if (cmd == "ved") {
      std::ifstream in(config.vectors);
      if (!in) throw Error(ErrorKind::kInvalidConfig, "cannot read " + config.vectors);
      text = run_ved(config, in);
    } else if (cmd == "code-ved") {
      text = run_code_ved(config);
    } else if (cmd == "min-list") {
      text = run_min_list(config);
    } else if (cmd == "simulate") {
      text = run_simulate(config);
    } else {
      SweepOutput s = run_sweep(config);
      text = std::move(s.csv);
      svg = std::move(s.svg);
    }

    if (config.out.empty()) {
      out << text;
    } else {
      std::ofstream f(config.out);
      if (!(f << text)) throw Error(ErrorKind::kInvalidConfig, "cannot write " + config.out);
    }
    if (!svg.empty()) {
      std::string path = config.svg;
      if (path.empty() && !config.out.empty()) {
        path = config.out;
        const auto dot = path.rfind('.');
        if (dot != std::string::npos && path.find('/', dot) == std::string::npos) {
          path.resize(dot);
        }
        path += ".svg";
      }
      if (!path.empty()) {
        std::ofstream f(path);
        if (!(f << svg)) throw Error(ErrorKind::kInvalidConfig, "cannot write " + path);
      }
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace ved::cli
