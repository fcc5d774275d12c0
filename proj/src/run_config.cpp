#include "harmdstm/run_config.hpp"

#include <sstream>

#include "harmdstm/io_util.hpp"

namespace harmdstm {

using nlohmann::json;

namespace {

json default_document() {
  json d;
  d["out"] = "runs/out";
  d["data"] = {{"path", ""},
               {"format", "native"},
               {"thin", {1, 1}},
               {"crop", nullptr}};
  d["knots"] = {{"nx", 12}, {"ny", 12}};
  d["phi"] = nullptr;  // resolved to domain diagonal / 3
  d["jitter"] = 1e-8;
  d["hyper"] = {{"xi", 11.0}, {"a", 2.0},     {"b", 2.0},
                {"a_w", 2.0}, {"b_w", 2.0},   {"sigma0_scale", 100.0}};
  d["sampler"] = {{"n_iter", 5000}, {"n_burn", 1000},        {"thin", 1},
                  {"seed", 20180101}, {"parallel_width", 1}, {"chunk_draws", 256}};
  d["periods"] = {{"period1", {1979, 1980, 1981, 1982, 1983, 1984, 1985, 1986, 1987, 1988}},
                  {"period2", {2009, 2010, 2011, 2012, 2013, 2014, 2015, 2016, 2017, 2018}}};
  json explore_p1 = json::array();
  for (int y = 1979; y <= 1994; ++y) explore_p1.push_back(y);
  json explore_p2 = json::array();
  for (int y = 2003; y <= 2018; ++y) explore_p2.push_back(y);
  d["explore"] = {{"period1", explore_p1}, {"period2", explore_p2}};
  d["summarize"] = {{"field_years", json::array()}, {"semiannual", true}};
  d["fit"] = {{"recovery_truth", ""}};
  d["simulate"] = {{"domain", {0.0, 1.0, 0.0, 1.0}},
                   {"site_nx", 8},
                   {"site_ny", 8},
                   {"knot_nx", 4},
                   {"knot_ny", 4},
                   {"first_year", 1979},
                   {"n_years", 8},
                   {"days", 0},  // 0 -> calendar length from the year label
                   {"sigma_beta_scale", 0.01},
                   {"sigma2_w", 0.01},
                   {"sigma2_eps", 1.0},
                   {"mu0", {8.0, 1.0, 1.0, 0.3, 10.0, 1.0, 1.0, 0.3}},
                   {"sigma0_scale", 1.0},
                   {"phi", nullptr},
                   {"jitter", 1e-8},
                   {"seed", 1}};
  return d;
}

void flatten(const json& j, const std::string& prefix, std::vector<std::string>& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
  } else {
    out.push_back(prefix);
  }
}

json* navigate(json& doc, const std::string& dotted, bool create) {
  json* node = &doc;
  std::istringstream in(dotted);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(in, part, '.')) parts.push_back(part);
  if (parts.empty()) return nullptr;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->is_object()) return nullptr;
    if (!node->contains(parts[i])) {
      if (!create) return nullptr;
      (*node)[parts[i]] = json::object();
    }
    node = &(*node)[parts[i]];
  }
  if (!node->is_object()) return nullptr;
  if (!node->contains(parts.back()) && !create) return nullptr;
  return &(*node)[parts.back()];
}

// Merge `patch` over `base`, recording leaves touched.
void merge(json& base, const json& patch, const std::string& prefix,
           std::map<std::string, std::string>& provenance, const std::string& source) {
  if (!patch.is_object()) return;
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it.value().is_object() && base.contains(it.key()) && base[it.key()].is_object()) {
      merge(base[it.key()], it.value(), path, provenance, source);
    } else {
      base[it.key()] = it.value();
      std::vector<std::string> leaves;
      flatten(it.value(), path, leaves);
      if (leaves.empty()) leaves.push_back(path);
      for (const std::string& leaf : leaves) provenance[leaf] = source;
    }
  }
}

int get_int(const json& j, const char* what) {
  if (!j.is_number_integer() && !j.is_number_unsigned())
    throw std::invalid_argument(std::string("config: ") + what + " must be an integer");
  return j.get<int>();
}

double get_double(const json& j, const char* what) {
  if (!j.is_number())
    throw std::invalid_argument(std::string("config: ") + what + " must be a number");
  return j.get<double>();
}

std::vector<int> get_int_array(const json& j, const char* what) {
  if (!j.is_array()) throw std::invalid_argument(std::string("config: ") + what + " must be an array");
  std::vector<int> out;
  for (const json& v : j) out.push_back(get_int(v, what));
  return out;
}

}  // namespace

RunConfig RunConfig::defaults() {
  RunConfig cfg;
  cfg.doc_ = default_document();
  std::vector<std::string> leaves;
  flatten(cfg.doc_, "", leaves);
  for (const std::string& leaf : leaves) cfg.provenance_[leaf] = "default";
  return cfg;
}

RunConfig RunConfig::resolve(const std::optional<std::filesystem::path>& config_path,
                             const std::vector<std::string>& set_overrides,
                             const std::optional<std::uint64_t>& seed,
                             const std::optional<std::string>& out,
                             const std::optional<int>& threads) {
  RunConfig cfg = defaults();
  if (config_path) {
    json file;
    try {
      file = json::parse(read_text_file(*config_path));
    } catch (const json::exception& e) {
      throw std::invalid_argument("config: cannot parse " + config_path->string() + ": " +
                                  e.what());
    }
    if (!file.is_object()) throw std::invalid_argument("config: top level must be an object");
    merge(cfg.doc_, file, "", cfg.provenance_, "config");
  }
  for (const std::string& kv : set_overrides) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    const std::string raw = kv.substr(eq + 1);
    json value;
    try {
      value = json::parse(raw);
    } catch (const json::exception&) {
      value = raw;  // plain string
    }
    json* node = navigate(cfg.doc_, key, /*create=*/true);
    if (!node) throw std::invalid_argument("--set: cannot address key '" + key + "'");
    *node = value;
    cfg.provenance_[key] = "override";
  }
  if (seed) {
    cfg.doc_["sampler"]["seed"] = *seed;
    cfg.doc_["simulate"]["seed"] = *seed;
    cfg.provenance_["sampler.seed"] = "override";
    cfg.provenance_["simulate.seed"] = "override";
  }
  if (out) {
    cfg.doc_["out"] = *out;
    cfg.provenance_["out"] = "override";
  }
  if (threads) {
    cfg.doc_["sampler"]["parallel_width"] = *threads;
    cfg.provenance_["sampler.parallel_width"] = "override";
  }
  return cfg;
}

std::string RunConfig::config_hash() const { return hex64(fnv1a64(doc_.dump())); }

std::string RunConfig::dump_with_provenance() const {
  std::vector<std::string> leaves;
  flatten(doc_, "", leaves);
  std::ostringstream out;
  for (const std::string& leaf : leaves) {
    const json* node = navigate(const_cast<json&>(doc_), leaf, /*create=*/false);
    auto it = provenance_.find(leaf);
    const std::string source = (it != provenance_.end()) ? it->second : "default";
    out << leaf << " = " << (node ? node->dump() : "null") << "  [" << source << "]\n";
  }
  return out.str();
}

std::filesystem::path RunConfig::out_dir() const { return doc_.at("out").get<std::string>(); }

std::string RunConfig::data_path() const { return doc_.at("data").at("path").get<std::string>(); }

std::string RunConfig::data_format() const {
  const std::string f = doc_.at("data").at("format").get<std::string>();
  if (f != "native" && f != "csv")
    throw std::invalid_argument("config: data.format must be 'native' or 'csv'");
  return f;
}

std::pair<int, int> RunConfig::data_thin() const {
  const std::vector<int> t = get_int_array(doc_.at("data").at("thin"), "data.thin");
  if (t.size() != 2 || t[0] < 1 || t[1] < 1)
    throw std::invalid_argument("config: data.thin must be two strides >= 1");
  return {t[0], t[1]};
}

std::optional<std::array<int, 4>> RunConfig::data_crop() const {
  const json& c = doc_.at("data").at("crop");
  if (c.is_null()) return std::nullopt;
  const std::vector<int> v = get_int_array(c, "data.crop");
  if (v.size() != 4)
    throw std::invalid_argument("config: data.crop must be [row0, row1, col0, col1]");
  return std::array<int, 4>{v[0], v[1], v[2], v[3]};
}

std::pair<int, int> RunConfig::knot_counts() const {
  const int nx = get_int(doc_.at("knots").at("nx"), "knots.nx");
  const int ny = get_int(doc_.at("knots").at("ny"), "knots.ny");
  if (nx < 1 || ny < 1) throw std::invalid_argument("config: knot counts must be >= 1");
  return {nx, ny};
}

std::optional<double> RunConfig::phi() const {
  const json& p = doc_.at("phi");
  if (p.is_null()) return std::nullopt;
  const double v = get_double(p, "phi");
  if (!(v > 0.0)) throw std::invalid_argument("config: phi must be positive");
  return v;
}

double RunConfig::jitter() const {
  const double j = get_double(doc_.at("jitter"), "jitter");
  if (!(j >= 0.0)) throw std::invalid_argument("config: jitter must be >= 0");
  return j;
}

double RunConfig::default_phi(const Bounds& bounds) { return bounds.diagonal() / 3.0; }

Hyperparameters RunConfig::hyperparameters(double resolved_phi) const {
  const json& h = doc_.at("hyper");
  Hyperparameters hyp = Hyperparameters::defaults(resolved_phi);
  hyp.xi = get_double(h.at("xi"), "hyper.xi");
  hyp.a = get_double(h.at("a"), "hyper.a");
  hyp.b = get_double(h.at("b"), "hyper.b");
  hyp.a_w = Eigen::VectorXd::Constant(kStateDim, get_double(h.at("a_w"), "hyper.a_w"));
  hyp.b_w = Eigen::VectorXd::Constant(kStateDim, get_double(h.at("b_w"), "hyper.b_w"));
  hyp.Sigma0 = get_double(h.at("sigma0_scale"), "hyper.sigma0_scale") *
               Eigen::MatrixXd::Identity(kStateDim, kStateDim);
  hyp.validate();
  return hyp;
}

SamplerConfig RunConfig::sampler_config() const {
  const json& s = doc_.at("sampler");
  SamplerConfig cfg;
  cfg.n_iter = get_int(s.at("n_iter"), "sampler.n_iter");
  cfg.n_burn = get_int(s.at("n_burn"), "sampler.n_burn");
  cfg.thin = get_int(s.at("thin"), "sampler.thin");
  cfg.seed = s.at("seed").get<std::uint64_t>();
  cfg.parallel_width = get_int(s.at("parallel_width"), "sampler.parallel_width");
  cfg.chunk_draws = get_int(s.at("chunk_draws"), "sampler.chunk_draws");
  cfg.validate();
  return cfg;
}

PeriodSpec RunConfig::shift_periods() const {
  PeriodSpec p;
  p.period1 = get_int_array(doc_.at("periods").at("period1"), "periods.period1");
  p.period2 = get_int_array(doc_.at("periods").at("period2"), "periods.period2");
  p.validate();
  return p;
}

PeriodSpec RunConfig::explore_periods() const {
  PeriodSpec p;
  p.period1 = get_int_array(doc_.at("explore").at("period1"), "explore.period1");
  p.period2 = get_int_array(doc_.at("explore").at("period2"), "explore.period2");
  p.validate();
  return p;
}

std::vector<int> RunConfig::field_years() const {
  return get_int_array(doc_.at("summarize").at("field_years"), "summarize.field_years");
}

bool RunConfig::summarize_semiannual() const {
  return doc_.at("summarize").at("semiannual").get<bool>();
}

std::optional<std::string> RunConfig::recovery_truth() const {
  const std::string p = doc_.at("fit").at("recovery_truth").get<std::string>();
  if (p.empty()) return std::nullopt;
  return p;
}

TruthSpec RunConfig::truth_spec() const {
  const json& s = doc_.at("simulate");
  TruthSpec spec;
  const json& dom = s.at("domain");
  if (!dom.is_array() || dom.size() != 4)
    throw std::invalid_argument("config: simulate.domain must be [xmin, xmax, ymin, ymax]");
  spec.domain = {get_double(dom[0], "domain"), get_double(dom[1], "domain"),
                 get_double(dom[2], "domain"), get_double(dom[3], "domain")};
  spec.site_nx = get_int(s.at("site_nx"), "simulate.site_nx");
  spec.site_ny = get_int(s.at("site_ny"), "simulate.site_ny");
  spec.knot_nx = get_int(s.at("knot_nx"), "simulate.knot_nx");
  spec.knot_ny = get_int(s.at("knot_ny"), "simulate.knot_ny");
  const int first = get_int(s.at("first_year"), "simulate.first_year");
  const int count = get_int(s.at("n_years"), "simulate.n_years");
  const int days = get_int(s.at("days"), "simulate.days");
  if (count < 1) throw std::invalid_argument("config: simulate.n_years must be >= 1");
  for (int k = 0; k < count; ++k) {
    const int label = first + k;
    spec.years.push_back({label, days == 0 ? calendar_days(label) : days});
  }
  spec.Sigma_beta = get_double(s.at("sigma_beta_scale"), "simulate.sigma_beta_scale") *
                    Eigen::MatrixXd::Identity(kStateDim, kStateDim);
  spec.sigma2_w =
      Eigen::VectorXd::Constant(kStateDim, get_double(s.at("sigma2_w"), "simulate.sigma2_w"));
  spec.sigma2_eps =
      Eigen::MatrixXd::Constant(1, 2, get_double(s.at("sigma2_eps"), "simulate.sigma2_eps"));
  const json& mu0 = s.at("mu0");
  if (!mu0.is_array() || mu0.size() != kStateDim)
    throw std::invalid_argument("config: simulate.mu0 must have 8 entries");
  spec.mu0.resize(kStateDim);
  for (int c = 0; c < kStateDim; ++c) spec.mu0(c) = get_double(mu0[c], "simulate.mu0");
  spec.Sigma0 = get_double(s.at("sigma0_scale"), "simulate.sigma0_scale") *
                Eigen::MatrixXd::Identity(kStateDim, kStateDim);
  const json& phi = s.at("phi");
  spec.phi = phi.is_null() ? default_phi(spec.domain) : get_double(phi, "simulate.phi");
  spec.jitter = get_double(s.at("jitter"), "simulate.jitter");
  spec.seed = s.at("seed").get<std::uint64_t>();
  spec.validate();
  return spec;
}

}  // namespace harmdstm
