#include "harmdstm/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "harmdstm/io_util.hpp"

namespace harmdstm {

using nlohmann::json;

namespace {

constexpr int kMinDays = 8;  // short synthetic years are allowed down to this

bool is_leap(int year) { return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0; }

const int kMonthDays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};

int days_in_month(int year, int month) {
  if (month == 2 && is_leap(year)) return 29;
  return kMonthDays[month - 1];
}

struct Date {
  int year, month, day;
};

Date parse_date(const std::string& s) {
  int y = 0, m = 0, d = 0;
  char dash1 = 0, dash2 = 0;
  std::istringstream in(s);
  in >> y >> dash1 >> m >> dash2 >> d;
  if (!in || dash1 != '-' || dash2 != '-' || m < 1 || m > 12 || d < 1 ||
      d > days_in_month(y, m))
    throw data_error("invalid ISO-8601 date: '" + s + "'");
  return {y, m, d};
}

int day_of_year(const Date& dt) {
  int doy = dt.day;
  for (int m = 1; m < dt.month; ++m) doy += days_in_month(dt.year, m);
  return doy;
}

std::string date_string(int year, int doy) {
  int m = 1;
  while (doy > days_in_month(year, m)) {
    doy -= days_in_month(year, m);
    ++m;
  }
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, m, doy);
  return buf;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || (end && *end != '\0'))
    throw data_error(std::string("cannot parse ") + what + ": '" + s + "'");
  return v;
}

// Assigns lattice row/col indices when the (x, y) pairs form a complete
// Cartesian grid; otherwise leaves them at -1.
void infer_grid_indices(std::vector<Site>& sites) {
  std::set<double> xs, ys;
  for (const Site& s : sites) {
    xs.insert(s.x);
    ys.insert(s.y);
  }
  if (xs.size() * ys.size() != sites.size()) return;
  std::map<double, int> xi, yi;
  int k = 0;
  for (double v : xs) xi[v] = k++;
  k = 0;
  for (double v : ys) yi[v] = k++;
  std::set<std::pair<int, int>> seen;
  for (const Site& s : sites)
    if (!seen.insert({yi[s.y], xi[s.x]}).second) return;  // duplicate cell
  for (Site& s : sites) {
    s.col = xi[s.x];
    s.row = yi[s.y];
  }
}

void validate_years(const std::vector<YearInfo>& years) {
  if (years.empty()) throw std::invalid_argument("dataset: need at least one year");
  std::set<int> labels;
  for (const YearInfo& y : years) {
    if (y.days < kMinDays)
      throw std::invalid_argument("dataset: year day count below the minimum of 8");
    if (!labels.insert(y.label).second)
      throw std::invalid_argument("dataset: duplicate year label");
  }
}

}  // namespace

int calendar_days(int year) { return is_leap(year) ? 366 : 365; }

void RawPanel::validate() const {
  if (sites.empty()) throw std::invalid_argument("panel: need at least one site");
  validate_years(years);
  for (int j = 0; j < 2; ++j) {
    if (static_cast<int>(values[j].size()) != n_years())
      throw std::invalid_argument("panel: values/year count mismatch");
    for (int l = 0; l < n_years(); ++l) {
      const Eigen::MatrixXd& v = values[j][l];
      if (v.rows() != n_sites() || v.cols() != years[l].days)
        throw std::invalid_argument("panel: value matrix shape mismatch");
      if (!v.allFinite()) throw data_error("panel: non-finite temperature value");
    }
  }
  for (int l = 0; l < n_years(); ++l)
    for (int i = 0; i < n_sites(); ++i)
      for (int t = 0; t < years[l].days; ++t)
        if (values[0][l](i, t) > values[1][l](i, t)) {
          std::ostringstream msg;
          msg << "panel: tmin > tmax at site " << sites[i].id << ", "
              << date_string(years[l].label, t + 1);
          throw data_error(msg.str());
        }
}

TemperatureDataset::TemperatureDataset(std::vector<Site> sites, std::vector<YearInfo> years,
                                       std::array<std::vector<Eigen::MatrixXd>, 2> centered_values,
                                       std::array<Eigen::MatrixXd, 2> offsets)
    : sites_(std::move(sites)),
      years_(std::move(years)),
      values_(std::move(centered_values)),
      offsets_(std::move(offsets)) {
  if (sites_.empty()) throw std::invalid_argument("dataset: need at least one site");
  validate_years(years_);
  for (const Site& s : sites_)
    if (!std::isfinite(s.x) || !std::isfinite(s.y))
      throw std::invalid_argument("dataset: non-finite site coordinate");
  for (int j = 0; j < 2; ++j) {
    if (static_cast<int>(values_[j].size()) != n_years())
      throw std::invalid_argument("dataset: values/year count mismatch");
    for (int l = 0; l < n_years(); ++l) {
      const Eigen::MatrixXd& v = values_[j][l];
      if (v.rows() != n_sites() || v.cols() != years_[l].days)
        throw std::invalid_argument("dataset: value matrix shape mismatch");
      if (!v.allFinite()) throw data_error("dataset: non-finite value");
    }
    if (offsets_[j].rows() != n_sites() || offsets_[j].cols() != n_years())
      throw std::invalid_argument("dataset: offsets shape mismatch");
    if (!offsets_[j].allFinite()) throw data_error("dataset: non-finite offset");
  }
}

std::vector<Location> TemperatureDataset::locations() const {
  std::vector<Location> out;
  out.reserve(sites_.size());
  for (const Site& s : sites_) out.push_back({s.x, s.y});
  return out;
}

Bounds TemperatureDataset::bounding_box() const {
  Bounds b{sites_[0].x, sites_[0].x, sites_[0].y, sites_[0].y};
  for (const Site& s : sites_) {
    b.xmin = std::min(b.xmin, s.x);
    b.xmax = std::max(b.xmax, s.x);
    b.ymin = std::min(b.ymin, s.y);
    b.ymax = std::max(b.ymax, s.y);
  }
  return b;
}

bool TemperatureDataset::has_grid_indices() const {
  return std::all_of(sites_.begin(), sites_.end(),
                     [](const Site& s) { return s.row >= 0 && s.col >= 0; });
}

int TemperatureDataset::year_index(int label) const {
  for (int l = 0; l < n_years(); ++l)
    if (years_[l].label == label) return l;
  throw std::invalid_argument("dataset: no year labelled " + std::to_string(label));
}

RawPanel load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open CSV: " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw data_error("empty CSV: " + path.string());
  const std::vector<std::string> header = split_csv_line(line);
  auto col_of = [&](const std::string& name) {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] == name) return static_cast<int>(c);
    throw data_error("CSV is missing column '" + name + "'");
  };
  const int c_site = col_of(schema.site_id), c_x = col_of(schema.x), c_y = col_of(schema.y);
  const int c_date = col_of(schema.date), c_min = col_of(schema.tmin), c_max = col_of(schema.tmax);

  struct SiteAccum {
    Site site;
    // (year, doy) -> (tmin, tmax)
    std::map<std::pair<int, int>, std::pair<double, double>> obs;
  };
  std::vector<SiteAccum> accums;
  std::map<std::string, int> site_index;
  std::set<int> year_labels;

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (static_cast<int>(f.size()) <= std::max({c_site, c_x, c_y, c_date, c_min, c_max}))
      throw data_error("CSV line " + std::to_string(lineno) + ": too few columns");
    const std::string& id = f[c_site];
    const double x = parse_double(f[c_x], "x");
    const double y = parse_double(f[c_y], "y");
    const Date date = parse_date(f[c_date]);
    const double tmin = parse_double(f[c_min], "tmin");
    const double tmax = parse_double(f[c_max], "tmax");
    if (!std::isfinite(tmin) || !std::isfinite(tmax))
      throw data_error("non-finite temperature at site " + id + ", " + f[c_date]);
    if (tmin > tmax) throw data_error("tmin > tmax at site " + id + ", " + f[c_date]);

    auto [it, inserted] = site_index.try_emplace(id, static_cast<int>(accums.size()));
    if (inserted) {
      SiteAccum acc;
      acc.site = Site{id, x, y, -1, -1};
      accums.push_back(std::move(acc));
    } else {
      const Site& s = accums[it->second].site;
      if (s.x != x || s.y != y)
        throw data_error("site " + id + " has inconsistent coordinates");
    }
    const auto key = std::make_pair(date.year, day_of_year(date));
    if (!accums[it->second].obs.emplace(key, std::make_pair(tmin, tmax)).second)
      throw data_error("duplicate observation for site " + id + ", " + f[c_date]);
    year_labels.insert(date.year);
  }
  if (accums.empty()) throw data_error("CSV has no data rows: " + path.string());

  RawPanel panel;
  for (int label : year_labels) panel.years.push_back({label, calendar_days(label)});
  const int n = static_cast<int>(accums.size());
  const int L = panel.n_years();
  for (int j = 0; j < 2; ++j) {
    panel.values[j].resize(L);
    for (int l = 0; l < L; ++l) panel.values[j][l].resize(n, panel.years[l].days);
  }
  for (int i = 0; i < n; ++i) {
    panel.sites.push_back(accums[i].site);
    for (int l = 0; l < L; ++l) {
      const int label = panel.years[l].label;
      const int days = panel.years[l].days;
      int missing = 0;
      std::string first_missing;
      for (int doy = 1; doy <= days; ++doy) {
        auto it = accums[i].obs.find({label, doy});
        if (it == accums[i].obs.end()) {
          if (missing == 0) first_missing = date_string(label, doy);
          ++missing;
          continue;
        }
        panel.values[0][l](i, doy - 1) = it->second.first;
        panel.values[1][l](i, doy - 1) = it->second.second;
      }
      if (missing > 0) {
        std::ostringstream msg;
        msg << "incomplete panel: site " << panel.sites[i].id << " year " << label << " missing "
            << missing << " day(s), first " << first_missing;
        throw incomplete_panel_error(msg.str());
      }
    }
  }
  infer_grid_indices(panel.sites);
  panel.validate();
  return panel;
}

void write_csv(const RawPanel& panel, const std::filesystem::path& path,
               const CsvSchema& schema) {
  panel.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open for writing: " + path.string());
  out << schema.site_id << ',' << schema.x << ',' << schema.y << ',' << schema.date << ','
      << schema.tmin << ',' << schema.tmax << '\n';
  for (int i = 0; i < panel.n_sites(); ++i) {
    const Site& s = panel.sites[i];
    for (int l = 0; l < panel.n_years(); ++l) {
      const YearInfo& y = panel.years[l];
      for (int t = 1; t <= y.days; ++t) {
        out << s.id << ',' << format_double(s.x) << ',' << format_double(s.y) << ','
            << date_string(y.label, t) << ',' << format_double(panel.values[0][l](i, t - 1))
            << ',' << format_double(panel.values[1][l](i, t - 1)) << '\n';
      }
    }
  }
  if (!out) throw io_error("short write: " + path.string());
}

TemperatureDataset center_by_year(const RawPanel& panel) {
  panel.validate();
  const int n = panel.n_sites();
  const int L = panel.n_years();
  std::array<std::vector<Eigen::MatrixXd>, 2> centered;
  std::array<Eigen::MatrixXd, 2> offsets;
  for (int j = 0; j < 2; ++j) {
    offsets[j].resize(n, L);
    centered[j].resize(L);
    for (int l = 0; l < L; ++l) {
      const Eigen::MatrixXd& raw = panel.values[j][l];
      offsets[j].col(l) = raw.rowwise().mean();
      centered[j][l] = raw.colwise() - offsets[j].col(l);
    }
  }
  return TemperatureDataset(panel.sites, panel.years, std::move(centered), std::move(offsets));
}

RawPanel uncenter(const TemperatureDataset& dataset) {
  RawPanel panel;
  panel.sites = dataset.sites();
  panel.years = dataset.years();
  for (int j = 0; j < 2; ++j) {
    const auto var = static_cast<Variable>(j);
    panel.values[j].resize(dataset.n_years());
    for (int l = 0; l < dataset.n_years(); ++l)
      panel.values[j][l] = dataset.values(var, l).colwise() + dataset.offsets(var).col(l);
  }
  return panel;
}

namespace {

TemperatureDataset subset_sites(const TemperatureDataset& dataset, const std::vector<int>& keep,
                                const std::vector<Site>& new_sites) {
  std::array<std::vector<Eigen::MatrixXd>, 2> values;
  std::array<Eigen::MatrixXd, 2> offsets;
  const int nk = static_cast<int>(keep.size());
  for (int j = 0; j < 2; ++j) {
    const auto var = static_cast<Variable>(j);
    values[j].resize(dataset.n_years());
    offsets[j].resize(nk, dataset.n_years());
    for (int l = 0; l < dataset.n_years(); ++l) {
      values[j][l].resize(nk, dataset.year(l).days);
      for (int r = 0; r < nk; ++r) values[j][l].row(r) = dataset.values(var, l).row(keep[r]);
    }
    for (int r = 0; r < nk; ++r) offsets[j].row(r) = dataset.offsets(var).row(keep[r]);
  }
  return TemperatureDataset(new_sites, dataset.years(), std::move(values), std::move(offsets));
}

void require_grid(const TemperatureDataset& dataset, const char* op) {
  if (!dataset.has_grid_indices())
    throw std::invalid_argument(std::string(op) + ": sites carry no grid row/col indices");
}

}  // namespace

TemperatureDataset thin_grid(const TemperatureDataset& dataset, int k_x, int k_y) {
  if (k_x < 1 || k_y < 1) throw std::invalid_argument("thin_grid: strides must be >= 1");
  require_grid(dataset, "thin_grid");
  std::vector<int> keep;
  std::vector<Site> sites;
  for (int i = 0; i < dataset.n_sites(); ++i) {
    const Site& s = dataset.sites()[i];
    if (s.col % k_x == 0 && s.row % k_y == 0) {
      keep.push_back(i);
      Site t = s;
      t.col = s.col / k_x;
      t.row = s.row / k_y;
      sites.push_back(t);
    }
  }
  if (keep.empty()) throw std::invalid_argument("thin_grid: no sites left after thinning");
  return subset_sites(dataset, keep, sites);
}

TemperatureDataset crop_grid(const TemperatureDataset& dataset, int row0, int row1, int col0,
                             int col1) {
  if (row0 > row1 || col0 > col1) throw std::invalid_argument("crop_grid: empty index window");
  require_grid(dataset, "crop_grid");
  std::vector<int> keep;
  std::vector<Site> sites;
  for (int i = 0; i < dataset.n_sites(); ++i) {
    const Site& s = dataset.sites()[i];
    if (s.row >= row0 && s.row <= row1 && s.col >= col0 && s.col <= col1) {
      keep.push_back(i);
      Site t = s;
      t.row = s.row - row0;
      t.col = s.col - col0;
      sites.push_back(t);
    }
  }
  if (keep.empty()) throw std::invalid_argument("crop_grid: no sites inside the window");
  return subset_sites(dataset, keep, sites);
}

void TemperatureDataset::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  DoubleWriter writer(dir / "values.bin");
  for (int j = 0; j < 2; ++j)
    for (int l = 0; l < n_years(); ++l) writer.write_row_major(values_[j][l]);
  for (int j = 0; j < 2; ++j) writer.write_row_major(offsets_[j]);
  writer.close();

  json meta;
  meta["format"] = "harmdstm-dataset-v1";
  meta["layout"] =
      "values.bin: float64 LE; per variable (min, max), per year, sites x days row-major; "
      "then per variable the n x L offset matrix row-major";
  meta["n_sites"] = n_sites();
  json sites = json::array();
  for (const Site& s : sites_)
    sites.push_back({{"id", s.id}, {"x", s.x}, {"y", s.y}, {"row", s.row}, {"col", s.col}});
  meta["sites"] = std::move(sites);
  json years = json::array();
  for (const YearInfo& y : years_) years.push_back({{"label", y.label}, {"days", y.days}});
  meta["years"] = std::move(years);
  meta["values_checksum"] = hex64(writer.checksum());
  meta["values_count"] = writer.count();
  write_text_file(dir / "dataset.json", meta.dump(2) + "\n");
}

TemperatureDataset TemperatureDataset::load(const std::filesystem::path& dir) {
  json meta;
  try {
    meta = json::parse(read_text_file(dir / "dataset.json"));
  } catch (const json::exception& e) {
    throw io_error("cannot parse dataset.json: " + std::string(e.what()));
  }
  if (meta.value("format", "") != "harmdstm-dataset-v1")
    throw io_error("unrecognized dataset format in " + dir.string());

  std::vector<Site> sites;
  for (const json& s : meta.at("sites"))
    sites.push_back({s.at("id").get<std::string>(), s.at("x").get<double>(),
                     s.at("y").get<double>(), s.value("row", -1), s.value("col", -1)});
  std::vector<YearInfo> years;
  for (const json& y : meta.at("years"))
    years.push_back({y.at("label").get<int>(), y.at("days").get<int>()});

  const std::vector<double> raw = read_doubles(dir / "values.bin");
  if (raw.size() != meta.at("values_count").get<std::size_t>())
    throw io_error("values.bin length mismatch in " + dir.string());
  if (hex64(fnv1a64(raw.data(), raw.size() * sizeof(double))) !=
      meta.at("values_checksum").get<std::string>())
    throw io_error("values.bin checksum mismatch in " + dir.string());

  const int n = static_cast<int>(sites.size());
  const int L = static_cast<int>(years.size());
  std::size_t pos = 0;
  auto take_matrix = [&](int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) m(r, c) = raw[pos++];
    return m;
  };
  std::array<std::vector<Eigen::MatrixXd>, 2> values;
  for (int j = 0; j < 2; ++j) {
    values[j].resize(L);
    for (int l = 0; l < L; ++l) values[j][l] = take_matrix(n, years[l].days);
  }
  std::array<Eigen::MatrixXd, 2> offsets;
  for (int j = 0; j < 2; ++j) offsets[j] = take_matrix(n, L);
  if (pos != raw.size()) throw io_error("values.bin has trailing data in " + dir.string());
  return TemperatureDataset(std::move(sites), std::move(years), std::move(values),
                            std::move(offsets));
}

}  // namespace harmdstm
