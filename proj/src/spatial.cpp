#include "dk/spatial.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dk/rng.hpp"

namespace dk {

namespace {

struct Candidate {
  double d2;
  std::size_t index;
  bool operator<(const Candidate& o) const {
    return d2 < o.d2 || (d2 == o.d2 && index < o.index);
  }
};

std::vector<Neighbor> brute_force_knn(const Site& q, const std::vector<Site>& sites,
                                      std::size_t k) {
  std::vector<Candidate> all(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const double dx = sites[i].x - q.x, dy = sites[i].y - q.y;
    all[i] = {dx * dx + dy * dy, i};
  }
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end());
  std::vector<Neighbor> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = {all[i].index, std::sqrt(all[i].d2)};
  return out;
}

}  // namespace

GridIndex::GridIndex(const std::vector<Site>& sites) : sites_(sites) {
  double x1 = sites[0].x, y1 = sites[0].y;
  x0_ = x1;
  y0_ = y1;
  for (const Site& s : sites) {
    x0_ = std::min(x0_, s.x);
    y0_ = std::min(y0_, s.y);
    x1 = std::max(x1, s.x);
    y1 = std::max(y1, s.y);
  }
  const double span = std::max(std::max(x1 - x0_, y1 - y0_), 1e-12);
  const auto target = static_cast<std::size_t>(std::sqrt(static_cast<double>(sites.size())));
  const std::size_t cells = std::clamp<std::size_t>(target, 1, 1024);
  cell_ = span / static_cast<double>(cells);
  nx_ = static_cast<std::size_t>((x1 - x0_) / cell_) + 1;
  ny_ = static_cast<std::size_t>((y1 - y0_) / cell_) + 1;
  buckets_.resize(nx_ * ny_);
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const auto cx = static_cast<std::size_t>((sites[i].x - x0_) / cell_);
    const auto cy = static_cast<std::size_t>((sites[i].y - y0_) / cell_);
    buckets_[std::min(cx, nx_ - 1) * ny_ + std::min(cy, ny_ - 1)].push_back(
        static_cast<std::uint32_t>(i));
  }
}

std::vector<Neighbor> GridIndex::nearest(const Site& q, std::size_t k) const {
  if (sites_.size() <= 64) return brute_force_knn(q, sites_, k);

  const double cxf = (q.x - x0_) / cell_;
  const double cyf = (q.y - y0_) / cell_;
  const auto cx = static_cast<long>(std::floor(cxf));
  const auto cy = static_cast<long>(std::floor(cyf));

  std::vector<Candidate> found;
  found.reserve(4 * k);
  const long max_ring = static_cast<long>(std::max(nx_, ny_));
  for (long ring = 0; ring <= max_ring; ++ring) {
    // Collect the cells on this ring.
    for (long ix = cx - ring; ix <= cx + ring; ++ix) {
      for (long iy = cy - ring; iy <= cy + ring; ++iy) {
        if (std::max(std::labs(ix - cx), std::labs(iy - cy)) != ring) continue;
        if (ix < 0 || iy < 0 || ix >= static_cast<long>(nx_) || iy >= static_cast<long>(ny_))
          continue;
        for (std::uint32_t i : buckets_[static_cast<std::size_t>(ix) * ny_ +
                                        static_cast<std::size_t>(iy)]) {
          const double dx = sites_[i].x - q.x, dy = sites_[i].y - q.y;
          found.push_back({dx * dx + dy * dy, i});
        }
      }
    }
    if (found.size() >= k) {
      // All sites within ring*cell_ of the query cell have been seen; any
      // unvisited site is at least that far away, so the k best are final
      // once the k-th distance fits inside the ring.
      std::nth_element(found.begin(), found.begin() + static_cast<std::ptrdiff_t>(k - 1),
                       found.end());
      const double safe = static_cast<double>(ring) * cell_;
      if (found[k - 1].d2 <= safe * safe || ring == max_ring) break;
    }
  }
  if (found.size() < k) return brute_force_knn(q, sites_, k);
  std::partial_sort(found.begin(), found.begin() + static_cast<std::ptrdiff_t>(k), found.end());
  std::vector<Neighbor> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = {found[i].index, std::sqrt(found[i].d2)};
  return out;
}

SiteSet::SiteSet(std::vector<Site> sites) : sites_(std::move(sites)) {
  if (sites_.empty()) throw argument_error("SiteSet: empty site list");
  for (const Site& s : sites_)
    if (!std::isfinite(s.x) || !std::isfinite(s.y))
      throw argument_error("SiteSet: non-finite coordinate");
}

const GridIndex& SiteSet::index() const {
  if (!index_) index_ = std::make_shared<GridIndex>(sites_);
  return *index_;
}

void BivariateObservations::validate() const {
  const auto n = static_cast<Eigen::Index>(sites.size());
  if (z1.size() != n || z2.size() != n)
    throw argument_error("BivariateObservations: response length != site count");
  if (!z1.allFinite() || !z2.allFinite())
    throw argument_error("BivariateObservations: non-finite response value");
}

BivariateObservations BivariateObservations::subset(const std::vector<std::size_t>& idx) const {
  BivariateObservations out;
  std::vector<Site> s;
  s.reserve(idx.size());
  out.z1.resize(static_cast<Eigen::Index>(idx.size()));
  out.z2.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    s.push_back(sites[idx[i]]);
    out.z1[static_cast<Eigen::Index>(i)] = z1[static_cast<Eigen::Index>(idx[i])];
    out.z2[static_cast<Eigen::Index>(i)] = z2[static_cast<Eigen::Index>(idx[i])];
  }
  out.sites = SiteSet(std::move(s));
  return out;
}

std::vector<std::vector<std::size_t>> split_indices(std::size_t n, const SplitSpec& spec) {
  if (spec.fractions.empty()) throw config_error("split: no fractions given");
  double total = 0.0;
  for (double f : spec.fractions) {
    if (!(f > 0.0 && f < 1.0)) throw config_error("split: fractions must lie in (0,1)");
    total += f;
  }
  if (total > 1.0 + 1e-12) throw config_error("split: fractions sum above 1");

  Rng rng(spec.seed);
  std::vector<std::size_t> order = rng.permutation(n);

  std::vector<std::vector<std::size_t>> parts;
  parts.reserve(spec.fractions.size());
  std::size_t prev = 0;
  double cum = 0.0;
  for (double f : spec.fractions) {
    cum += f;
    const auto edge = static_cast<std::size_t>(std::llround(cum * static_cast<double>(n)));
    if (edge <= prev) throw config_error("split: a requested partition is empty");
    parts.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(prev),
                       order.begin() + static_cast<std::ptrdiff_t>(edge));
    prev = edge;
  }
  return parts;
}

std::vector<BivariateObservations> split(const BivariateObservations& obs,
                                         const SplitSpec& spec) {
  obs.validate();
  std::vector<BivariateObservations> out;
  for (const auto& idx : split_indices(obs.size(), spec)) out.push_back(obs.subset(idx));
  return out;
}

std::vector<Neighbor> knn(const Site& query, const SiteSet& refs, std::size_t g) {
  if (g == 0) throw argument_error("knn: G must be positive");
  if (g > refs.size()) throw argument_error("knn: G exceeds reference count");
  return refs.index().nearest(query, g);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<double> parse_row(const std::string& line, std::size_t expect,
                              std::size_t lineno) {
  std::vector<double> vals;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t comma = line.find(',', pos);
    if (comma == std::string::npos) comma = line.size();
    double v = 0;
    const char* first = line.data() + pos;
    const char* last = line.data() + comma;
    while (first < last && (*first == ' ' || *first == '\t')) ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last)
      throw format_error("csv: bad number at line " + std::to_string(lineno));
    vals.push_back(v);
    pos = comma + 1;
    if (comma == line.size()) break;
  }
  if (vals.size() != expect)
    throw format_error("csv: expected " + std::to_string(expect) + " columns at line " +
                       std::to_string(lineno));
  return vals;
}

std::string read_header(std::ifstream& in, const std::string& path) {
  std::string header;
  if (!std::getline(in, header)) throw format_error("csv: empty file " + path);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  return header;
}

}  // namespace

BivariateObservations read_observations_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw format_error("csv: cannot open " + path);
  if (read_header(in, path) != "x,y,z1,z2")
    throw format_error("csv: expected header x,y,z1,z2 in " + path);

  std::vector<Site> sites;
  std::vector<double> v1, v2;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto vals = parse_row(line, 4, lineno);
    for (double v : vals)
      if (!std::isfinite(v))
        throw format_error("csv: non-finite value at line " + std::to_string(lineno));
    sites.push_back({vals[0], vals[1]});
    v1.push_back(vals[2]);
    v2.push_back(vals[3]);
  }
  if (sites.empty()) throw format_error("csv: no data rows in " + path);
  BivariateObservations obs;
  obs.sites = SiteSet(std::move(sites));
  obs.z1 = Eigen::Map<Eigen::VectorXd>(v1.data(), static_cast<Eigen::Index>(v1.size()));
  obs.z2 = Eigen::Map<Eigen::VectorXd>(v2.data(), static_cast<Eigen::Index>(v2.size()));
  return obs;
}

void write_observations_csv(const std::string& path, const BivariateObservations& obs) {
  obs.validate();
  std::ofstream out(path);
  if (!out) throw format_error("csv: cannot write " + path);
  out << "x,y,z1,z2\n";
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    out << format_double(obs.sites[i].x) << ',' << format_double(obs.sites[i].y) << ','
        << format_double(obs.z1[k]) << ',' << format_double(obs.z2[k]) << '\n';
  }
}

SiteSet read_sites_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw format_error("csv: cannot open " + path);
  const std::string header = read_header(in, path);
  std::size_t cols = 0;
  if (header == "x,y")
    cols = 2;
  else if (header == "x,y,z1,z2")
    cols = 4;
  else
    throw format_error("csv: expected header x,y or x,y,z1,z2 in " + path);

  std::vector<Site> sites;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto vals = parse_row(line, cols, lineno);
    if (!std::isfinite(vals[0]) || !std::isfinite(vals[1]))
      throw format_error("csv: non-finite coordinate at line " + std::to_string(lineno));
    sites.push_back({vals[0], vals[1]});
  }
  if (sites.empty()) throw format_error("csv: no data rows in " + path);
  return SiteSet(std::move(sites));
}

}  // namespace dk
