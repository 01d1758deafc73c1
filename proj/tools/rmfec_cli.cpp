// Command-line front end: code parameters, encoding, decoding, Monte-Carlo
// simulation, the reference benchmark table, and the analytic calculators.
//
// Exit codes: 0 success, 1 invalid configuration or input, 2 resource refusal.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rmfec/analysis.hpp"
#include "rmfec/channel.hpp"
#include "rmfec/decoder.hpp"
#include "rmfec/rm_code.hpp"
#include "rmfec/simulate.hpp"

namespace {

using nlohmann::json;

rmfec::FrozenSpec parse_frozen(const std::string& s) {
  if (s.empty() || s == "none") return rmfec::FrozenSpec::none();
  if (s == "leftmost") return rmfec::FrozenSpec::leftmost();
  if (s == "leftmost_pair") return rmfec::FrozenSpec::leftmost_pair();
  std::vector<std::string> paths;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) paths.push_back(item);
  }
  return rmfec::FrozenSpec::custom(std::move(paths));
}

std::ostream& open_output(std::ofstream& file, const std::string& path) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw std::invalid_argument("cannot open output file '" + path + "'");
  return file;
}

int cmd_params(int m, int r, bool as_json, bool show_layout) {
  const auto params = rmfec::code_params(m, r);
  const auto layout = rmfec::info_layout(params);
  if (as_json) {
    json j{{"m", params.m}, {"r", params.r}, {"n", params.n}, {"k", params.k}, {"d", params.d}};
    if (show_layout) {
      json nodes = json::array();
      for (const auto& node : layout.nodes)
        nodes.push_back({{"path", node.path},
                         {"j", node.j},
                         {"s", node.s},
                         {"bits", node.bit_count},
                         {"offset", node.offset}});
      j["layout"] = nodes;
    }
    std::cout << j.dump(2) << '\n';
    return 0;
  }
  std::cout << "RM(" << r << "," << m << "): n=" << params.n << " k=" << params.k
            << " d=" << params.d << '\n';
  if (show_layout) {
    for (const auto& node : layout.nodes)
      std::cout << "  node (" << node.j << "," << node.s << ") path=" << (node.path.empty() ? "-" : node.path)
                << " bits=" << node.bit_count << " offset=" << node.offset << '\n';
  }
  return 0;
}

int cmd_encode(int m, int r, const std::string& info_file, const std::string& out_file) {
  const auto params = rmfec::code_params(m, r);
  std::ifstream in(info_file);
  if (!in) throw std::invalid_argument("cannot open info file '" + info_file + "'");
  std::ofstream file;
  std::ostream& out = open_output(file, out_file);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const rmfec::Bits info = rmfec::parse_bit_string(line);
    out << rmfec::format_bit_string(rmfec::encode_recursive(params, info)) << '\n';
  }
  return 0;
}

int cmd_decode(int m, int r, const std::string& metrics_file, const std::string& channel_json,
               const std::string& frozen, bool emit_codeword, const std::string& out_file) {
  const auto params = rmfec::code_params(m, r);
  const json chj = json::parse(channel_json);
  const rmfec::SimChannel channel = rmfec::sim_channel_from_json(chj);
  rmfec::Decoder decoder(params, parse_frozen(frozen));

  std::ifstream in(metrics_file);
  if (!in) throw std::invalid_argument("cannot open metrics file '" + metrics_file + "'");
  std::ofstream file;
  std::ostream& out = open_output(file, out_file);

  const double rate = static_cast<double>(params.k) / static_cast<double>(params.n);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const rmfec::DecodeResult* res = nullptr;
    if (channel.kind == rmfec::ChannelModel::Kind::awgn) {
      // one received vector per line, n whitespace-separated reals
      std::istringstream ss(line);
      std::vector<double> y;
      y.reserve(params.n);
      double v = 0.0;
      while (ss >> v) y.push_back(v);
      if (y.size() != params.n)
        throw std::invalid_argument("metrics line has " + std::to_string(y.size()) +
                                    " values, expected " + std::to_string(params.n));
      rmfec::MetricVector mv{rmfec::MetricForm::received_y, std::move(y)};
      res = &decoder.decode(mv, rmfec::ChannelModel::awgn(channel.resolve_sigma2(rate)));
    } else {
      const rmfec::Bits received = rmfec::parse_bit_string(line);
      if (received.size() != params.n)
        throw std::invalid_argument("received word length != n");
      res = &decoder.decode_hard(received, channel.p.value_or(0.0));
    }
    out << rmfec::format_bit_string(emit_codeword ? res->codeword : res->info) << '\n';
  }
  return 0;
}

int cmd_simulate(const std::string& config_file, std::optional<std::uint64_t> trials,
                 std::optional<std::uint64_t> seed, const std::string& frozen, int threads,
                 bool as_json, bool timing, const std::string& out_file) {
  std::ifstream in(config_file);
  if (!in) throw std::invalid_argument("cannot open config file '" + config_file + "'");
  json j;
  in >> j;
  rmfec::SimConfig cfg = rmfec::sim_config_from_json(j);
  if (trials) cfg.trials = *trials;
  if (seed) cfg.seed = *seed;
  if (!frozen.empty()) cfg.frozen = parse_frozen(frozen);
  if (threads > 0) cfg.threads = threads;

  const rmfec::SimResult res = rmfec::run_montecarlo(cfg);
  std::ofstream file;
  std::ostream& out = open_output(file, out_file);
  if (as_json)
    out << rmfec::sim_result_to_json(cfg, res, timing).dump(2) << '\n';
  else
    out << rmfec::sim_csv_header() << '\n' << rmfec::sim_csv_row(cfg, res, timing) << '\n';
  return 0;
}

int cmd_table2(std::uint64_t trials, std::uint64_t seed, const std::string& convention,
               const std::string& frozen, int threads, bool as_json) {
  const rmfec::SnrConvention conv = rmfec::snr_convention_from_string(convention);
  rmfec::FrozenSpec sub = frozen.empty() ? rmfec::FrozenSpec::leftmost() : parse_frozen(frozen);
  const auto rows = rmfec::reproduce_reference_table({seed}, trials, conv, threads, sub);
  if (as_json) {
    json out = json::array();
    for (const auto& row : rows) {
      out.push_back({{"snr_db", row.snr_db},
                     {"trials", row.trials},
                     {"recursive_ber", row.plain.ber},
                     {"recursive_ber_ci", {row.plain.ber_ci.lo, row.plain.ber_ci.hi}},
                     {"recursive_cw_ber", row.plain.cw_ber},
                     {"subcode_frozen", row.subcode.frozen_label},
                     {"subcode_ber", row.subcode.ber},
                     {"subcode_ber_ci", {row.subcode.ber_ci.lo, row.subcode.ber_ci.hi}},
                     {"subcode_cw_ber", row.subcode.cw_ber},
                     {"subcode_bler", row.subcode.bler},
                     {"subcode_bler_ci", {row.subcode.bler_ci.lo, row.subcode.bler_ci.hi}},
                     {"ref_recursive_ber", row.ref_recursive_ber},
                     {"ref_subcode_ber", row.ref_subcode_ber},
                     {"ref_subcode_bler", row.ref_subcode_bler},
                     {"ref_prior_recursive_bler", row.ref_prior_recursive_bler},
                     {"ref_majority_ber", row.ref_majority_ber}});
    }
    std::cout << out.dump(2) << '\n';
    return 0;
  }
  std::cout << "decoding performance for the {9,4} code, " << rmfec::to_string(conv)
            << ", subcode frozen=" << rows[0].subcode.frozen_label
            << "  (simulated | reference)\n";
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-24s %-21s %-21s %-21s\n", "row", "2 dB", "3 dB", "4 dB");
  std::cout << buf;
  auto line = [&](const char* name, auto value, auto ref) {
    std::snprintf(buf, sizeof(buf), "%-24s", name);
    std::cout << buf;
    for (int i = 0; i < 3; ++i) {
      const auto& row = rows[static_cast<std::size_t>(i)];
      std::snprintf(buf, sizeof(buf), " %-9.3g| %-9.3g", value(row), ref(row));
      std::cout << buf;
    }
    std::cout << '\n';
  };
  line("recursive info BER", [](const auto& r) { return r.plain.ber; },
       [](const auto& r) { return r.ref_recursive_ber; });
  line("recursive cw BER", [](const auto& r) { return r.plain.cw_ber; },
       [](const auto& r) { return r.ref_recursive_ber; });
  line("subcode info BER", [](const auto& r) { return r.subcode.ber; },
       [](const auto& r) { return r.ref_subcode_ber; });
  line("subcode cw BER", [](const auto& r) { return r.subcode.cw_ber; },
       [](const auto& r) { return r.ref_subcode_ber; });
  line("subcode BLER", [](const auto& r) { return r.subcode.bler; },
       [](const auto& r) { return r.ref_subcode_bler; });
  line("prior recursive BLER", [](const auto&) { return std::nan(""); },
       [](const auto& r) { return r.ref_prior_recursive_bler; });
  line("majority BER", [](const auto&) { return std::nan(""); },
       [](const auto& r) { return r.ref_majority_ber; });
  std::cout << "(prior recursive / majority rows are literature annotations; nothing is simulated)\n";
  return 0;
}

int cmd_analyze(int m, int r, std::optional<double> p, double c) {
  json j;
  const auto params = rmfec::code_params(m, r);
  j["m"] = m;
  j["r"] = r;
  j["n"] = params.n;
  j["k"] = params.k;
  j["d"] = params.d;
  const auto fixed_order = rmfec::threshold_report(m, r, rmfec::RateRegime::fixed_order, p, c);
  const auto fixed_rate = rmfec::threshold_report(m, r, rmfec::RateRegime::fixed_rate, p, c);
  j["fixed_order"] = {{"c", c},
                      {"t_hard", fixed_order.t_hard},
                      {"t_degenerate", fixed_order.t_degenerate},
                      {"h_residual", fixed_order.h_residual},
                      {"rho_euclidean", fixed_order.rho_euclidean}};
  j["fixed_rate"] = {{"t_hard", fixed_rate.t_hard},
                     {"t_degenerate", fixed_rate.t_degenerate},
                     {"h_residual", fixed_rate.h_residual},
                     {"rho_euclidean", fixed_rate.rho_euclidean}};
  const auto cmp = rmfec::capacity_comparison(m, r);
  j["capacity_comparison"] = {{"prior_recursive_t", cmp.prior_recursive_t},
                              {"prior_recursive_rho_sq", cmp.prior_recursive_rho_sq},
                              {"majority_h", cmp.majority_h},
                              {"majority_t", cmp.majority_t},
                              {"recursive_h", cmp.recursive_h},
                              {"recursive_t", cmp.recursive_t}};
  const auto gains = rmfec::asymptotic_gains();
  j["asymptotic_gains"] = {{"noise_power_ratio", gains.noise_power_ratio},
                           {"crossover_ratio", gains.crossover_ratio},
                           {"gain_db", gains.gain_db}};
  if (p) {
    const auto bound = rmfec::bsc_error_bound(m, r, *p);
    j["bsc_bound"] = {{"p", *p}, {"mu", bound.mu}, {"bound_alpha", bound.bound}};
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reed-Muller forward error correction toolkit"};
  app.require_subcommand(1);

  // params
  int p_m = 0, p_r = 0;
  bool p_json = false, p_layout = false;
  auto* sc_params = app.add_subcommand("params", "print n, k, d for RM(r,m)");
  sc_params->add_option("m", p_m, "number of variables")->required();
  sc_params->add_option("r", p_r, "order")->required();
  sc_params->add_flag("--json", p_json, "JSON output");
  sc_params->add_flag("--layout", p_layout, "also print the end-node layout");

  // encode
  int e_m = 0, e_r = 0;
  std::string e_info, e_out;
  auto* sc_encode = app.add_subcommand("encode", "encode info-bit lines into codeword lines");
  sc_encode->add_option("--m", e_m)->required();
  sc_encode->add_option("--r", e_r)->required();
  sc_encode->add_option("--info-file", e_info, "one '0'/'1' info string per line")->required();
  sc_encode->add_option("--out", e_out, "output file (default stdout)");

  // decode
  int d_m = 0, d_r = 0;
  std::string d_metrics, d_channel, d_frozen, d_out;
  bool d_codeword = false;
  auto* sc_decode = app.add_subcommand("decode", "decode received metrics into info-bit lines");
  sc_decode->add_option("--m", d_m)->required();
  sc_decode->add_option("--r", d_r)->required();
  sc_decode->add_option("--metrics-file", d_metrics,
                        "AWGN: n reals per line; BSC: '0'/'1' string per line")
      ->required();
  sc_decode->add_option("--channel", d_channel,
                        R"(channel JSON, e.g. {"kind":"awgn","sigma2":0.5} or {"kind":"bsc","p":0.05})")
      ->required();
  sc_decode->add_option("--frozen", d_frozen, "none | leftmost | comma-separated paths");
  sc_decode->add_flag("--codeword", d_codeword, "emit decoded codewords instead of info bits");
  sc_decode->add_option("--out", d_out, "output file (default stdout)");

  // simulate
  std::string s_config, s_frozen, s_out;
  std::uint64_t s_trials = 0, s_seed = 0;
  bool s_have_trials = false, s_have_seed = false;
  int s_threads = 0;
  bool s_json = false, s_timing = false;
  auto* sc_sim = app.add_subcommand("simulate", "seeded Monte-Carlo BER/BLER estimation");
  sc_sim->add_option("--config", s_config, "simulation config JSON file")->required();
  sc_sim->add_option("--trials", s_trials)->each([&](const std::string&) { s_have_trials = true; });
  sc_sim->add_option("--seed", s_seed)->each([&](const std::string&) { s_have_seed = true; });
  sc_sim->add_option("--frozen", s_frozen, "none | leftmost | comma-separated paths");
  sc_sim->add_option("--threads", s_threads, "worker count (0 = hardware)");
  sc_sim->add_flag("--json", s_json, "JSON output instead of CSV");
  sc_sim->add_flag("--timing", s_timing, "include measured wall_ms (breaks byte-for-byte determinism)");
  sc_sim->add_option("--out", s_out, "output file (default stdout)");

  // table2
  std::uint64_t t_trials = 100000, t_seed = 1;
  std::string t_convention = "eb_n0", t_frozen = "leftmost";
  int t_threads = 0;
  bool t_json = false;
  auto* sc_table = app.add_subcommand("table2", "reproduce the {9,4} reference benchmark");
  sc_table->add_option("--trials", t_trials, "base trial count (4 dB column uses 3x)");
  sc_table->add_option("--seed", t_seed);
  sc_table->add_option("--convention", t_convention, "eb_n0 | es_n0");
  sc_table->add_option("--frozen", t_frozen, "subcode frozen set: leftmost | leftmost_pair | paths");
  sc_table->add_option("--threads", t_threads);
  sc_table->add_flag("--json", t_json);

  // analyze
  int a_m = 0, a_r = 0;
  double a_p = -1.0, a_c = 0.7;
  auto* sc_analyze = app.add_subcommand("analyze", "emit the analytic calculators as JSON");
  sc_analyze->add_option("--m", a_m)->required();
  sc_analyze->add_option("--r", a_r)->required();
  sc_analyze->add_option("--p", a_p, "BSC crossover probability for the bit-error bound");
  sc_analyze->add_option("--c", a_c, "fixed-order threshold constant (> ln 2)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sc_params->parsed()) return cmd_params(p_m, p_r, p_json, p_layout);
    if (sc_encode->parsed()) return cmd_encode(e_m, e_r, e_info, e_out);
    if (sc_decode->parsed())
      return cmd_decode(d_m, d_r, d_metrics, d_channel, d_frozen, d_codeword, d_out);
    if (sc_sim->parsed())
      return cmd_simulate(s_config,
                          s_have_trials ? std::optional<std::uint64_t>(s_trials) : std::nullopt,
                          s_have_seed ? std::optional<std::uint64_t>(s_seed) : std::nullopt,
                          s_frozen, s_threads, s_json, s_timing, s_out);
    if (sc_table->parsed())
      return cmd_table2(t_trials, t_seed, t_convention, t_frozen, t_threads, t_json);
    if (sc_analyze->parsed())
      return cmd_analyze(a_m, a_r, a_p >= 0.0 ? std::optional<double>(a_p) : std::nullopt, a_c);
  } catch (const rmfec::ResourceRefused& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
