#include "harmdstm/draws.hpp"

#include <cstdio>

#include <json.hpp>

#include "harmdstm/io_util.hpp"
#include "harmdstm/serialize.hpp"

namespace harmdstm {

using nlohmann::json;

std::size_t DrawsMeta::doubles_per_draw() const {
  const std::size_t n = static_cast<std::size_t>(n_sites());
  const std::size_t L = static_cast<std::size_t>(n_years());
  return (L + 1) * n * kStateDim + kStateDim * kStateDim + 2 * n + kStateDim;
}

PosteriorDraws::PosteriorDraws(DrawsMeta meta) : meta_(std::move(meta)) {
  if (meta_.sites.empty()) throw std::invalid_argument("PosteriorDraws: no sites");
  if (meta_.years.empty()) throw std::invalid_argument("PosteriorDraws: no years");
}

void PosteriorDraws::append(DrawRecord record) {
  const int n = meta_.n_sites();
  const int L = meta_.n_years();
  if (static_cast<int>(record.beta.size()) != L + 1)
    throw std::invalid_argument("PosteriorDraws::append: beta must hold L + 1 fields");
  for (const Eigen::MatrixXd& b : record.beta)
    if (b.rows() != n || b.cols() != kStateDim)
      throw std::invalid_argument("PosteriorDraws::append: bad beta shape");
  if (record.Sigma_beta.rows() != kStateDim || record.Sigma_beta.cols() != kStateDim ||
      record.sigma2_eps.rows() != n || record.sigma2_eps.cols() != 2 ||
      record.sigma2_w.size() != kStateDim)
    throw std::invalid_argument("PosteriorDraws::append: bad component shape");
  draws_.push_back(std::move(record));
}

int PosteriorDraws::year_index(int label) const {
  for (int l = 0; l < meta_.n_years(); ++l)
    if (meta_.years[l].label == label) return l;
  throw std::invalid_argument("PosteriorDraws: no year labelled " + std::to_string(label));
}

namespace {

std::string chunk_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "chunk_%05d.bin", index);
  return buf;
}

void write_record(DoubleWriter& w, const DrawRecord& r) {
  for (const Eigen::MatrixXd& b : r.beta) w.write_row_major(b);
  w.write_row_major(r.Sigma_beta);
  for (int j = 0; j < 2; ++j) {
    Eigen::VectorXd col = r.sigma2_eps.col(j);
    w.write(col);
  }
  w.write(r.sigma2_w);
}

}  // namespace

void PosteriorDraws::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  const int chunk_draws = meta_.config.chunk_draws;
  const int n_chunks = (n_draws() + chunk_draws - 1) / chunk_draws;

  json manifest;
  manifest["format"] = "harmdstm-draws-manifest-v1";
  manifest["n_draws"] = n_draws();
  manifest["doubles_per_draw"] = meta_.doubles_per_draw();
  json chunks = json::array();
  for (int c = 0; c < n_chunks; ++c) {
    const int first = c * chunk_draws;
    const int count = std::min(chunk_draws, n_draws() - first);
    const std::string name = chunk_name(c);
    DoubleWriter writer(dir / name);
    for (int d = first; d < first + count; ++d) write_record(writer, draws_[d]);
    writer.close();
    chunks.push_back({{"file", name},
                      {"first_draw", first},
                      {"n_draws", count},
                      {"doubles", writer.count()},
                      {"fnv1a64", hex64(writer.checksum())}});
  }
  manifest["chunks"] = std::move(chunks);
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");

  json meta;
  meta["format"] = "harmdstm-draws-v1";
  meta["layout"] =
      "per draw: beta year 0..L (site-major, 8 coefficients inner), Sigma_beta 8x8 row-major, "
      "sigma2_eps (all sites min then max), sigma2_w q=0..7; float64 LE";
  meta["dims"] = {{"n_sites", meta_.n_sites()},
                  {"n_years", meta_.n_years()},
                  {"n_knots", meta_.n_knots()},
                  {"coeffs", kStateDim}};
  json sites = json::array();
  for (const Site& s : meta_.sites) sites.push_back(to_json(s));
  meta["sites"] = std::move(sites);
  meta["years"] = to_json(meta_.years);
  json knots = json::array();
  for (const Location& k : meta_.knots) knots.push_back({{"x", k.x}, {"y", k.y}});
  meta["knots"] = std::move(knots);
  meta["config"] = to_json(meta_.config);
  meta["hyperparameters"] = to_json(meta_.hyp);
  meta["jitter"] = meta_.jitter;
  meta["seed"] = meta_.config.seed;
  write_text_file(dir / "meta.json", meta.dump(2) + "\n");
}

PosteriorDraws PosteriorDraws::load(const std::filesystem::path& dir) {
  json meta;
  try {
    meta = json::parse(read_text_file(dir / "meta.json"));
  } catch (const json::exception& e) {
    throw io_error("cannot parse draws meta.json: " + std::string(e.what()));
  }
  if (meta.value("format", "") != "harmdstm-draws-v1")
    throw io_error("unrecognized draws format in " + dir.string());

  DrawsMeta dm;
  for (const json& s : meta.at("sites")) dm.sites.push_back(site_from_json(s));
  dm.years = years_from_json(meta.at("years"));
  for (const json& k : meta.at("knots"))
    dm.knots.push_back({k.at("x").get<double>(), k.at("y").get<double>()});
  dm.config = sampler_config_from_json(meta.at("config"));
  dm.hyp = hyperparameters_from_json(meta.at("hyperparameters"));
  dm.jitter = meta.at("jitter").get<double>();

  json manifest;
  try {
    manifest = json::parse(read_text_file(dir / "manifest.json"));
  } catch (const json::exception& e) {
    throw io_error("cannot parse draws manifest.json: " + std::string(e.what()));
  }

  PosteriorDraws out(dm);
  const std::size_t per_draw = dm.doubles_per_draw();
  const int n = dm.n_sites();
  const int L = dm.n_years();
  for (const json& chunk : manifest.at("chunks")) {
    const std::filesystem::path file = dir / chunk.at("file").get<std::string>();
    const std::vector<double> raw = read_doubles(file);
    if (raw.size() != chunk.at("doubles").get<std::size_t>())
      throw io_error("draw chunk length mismatch: " + file.string());
    if (hex64(fnv1a64(raw.data(), raw.size() * sizeof(double))) !=
        chunk.at("fnv1a64").get<std::string>())
      throw io_error("draw chunk checksum mismatch: " + file.string());
    const int count = chunk.at("n_draws").get<int>();
    if (raw.size() != per_draw * static_cast<std::size_t>(count))
      throw io_error("draw chunk record count mismatch: " + file.string());
    std::size_t pos = 0;
    for (int d = 0; d < count; ++d) {
      DrawRecord r;
      r.beta.resize(L + 1);
      for (int l = 0; l <= L; ++l) {
        r.beta[l].resize(n, kStateDim);
        for (int i = 0; i < n; ++i)
          for (int c = 0; c < kStateDim; ++c) r.beta[l](i, c) = raw[pos++];
      }
      r.Sigma_beta.resize(kStateDim, kStateDim);
      for (int a = 0; a < kStateDim; ++a)
        for (int b = 0; b < kStateDim; ++b) r.Sigma_beta(a, b) = raw[pos++];
      r.sigma2_eps.resize(n, 2);
      for (int j = 0; j < 2; ++j)
        for (int i = 0; i < n; ++i) r.sigma2_eps(i, j) = raw[pos++];
      r.sigma2_w.resize(kStateDim);
      for (int q = 0; q < kStateDim; ++q) r.sigma2_w(q) = raw[pos++];
      out.append(std::move(r));
    }
  }
  if (out.n_draws() != manifest.at("n_draws").get<int>())
    throw io_error("draws manifest count mismatch in " + dir.string());
  return out;
}

}  // namespace harmdstm
