#pragma once
// Synthetic multi-modality datasets and their on-disk form: a row-aligned CSV
// plus a JSON sidecar carrying the generating spec and a content fingerprint.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "drf/core.hpp"
#include "drf/rng.hpp"

namespace drf {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  return splitmix64(base ^ splitmix64(salt));
}

inline bool valid_identifier(const std::string& s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

// shortest round-trip decimal form
inline std::string format_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, p);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw std::runtime_error("not a number: '" + std::string(s) + "'");
  }
  return v;
}

constexpr std::uint64_t kFnvOffset = 0xCBF29CE484222325ull;
constexpr std::uint64_t kFnvPrime = 0x00000100000001B3ull;

inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = kFnvOffset) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return s;
}

}  // namespace detail

struct ModalitySpec {
  std::string name;
  Shape shape;
  double noise_std = 0.0;

  ordered_json to_json() const {
    ordered_json j;
    j["name"] = name;
    j["shape"] = shape.to_json();
    j["noise_std"] = noise_std;
    return j;
  }
  static ModalitySpec from_json(const ordered_json& j) {
    ModalitySpec m;
    m.name = j.at("name").get<std::string>();
    m.shape = Shape::from_json(j.at("shape"));
    m.noise_std = j.value("noise_std", 0.0);
    return m;
  }
};

// correlation: "correlated" keeps every row class-aligned across modalities;
// "independent" shuffles each modality's rows with its own seeded permutation,
// destroying the cross-modality pairing while keeping the per-modality value
// sets identical. label: "none" | "scalar" (class index) | "onehot".
struct DatasetSpec {
  std::size_t classes = 2;
  std::size_t samples_per_class = 1;
  std::uint64_t seed = 0;
  std::string correlation = "correlated";
  std::string label = "none";
  double grid = kDefaultGrid;
  std::vector<ModalitySpec> modalities;

  void validate() const {
    if (classes < 2) throw std::invalid_argument("dataset: classes must be >= 2");
    if (samples_per_class < 1) {
      throw std::invalid_argument("dataset: samples_per_class must be >= 1");
    }
    if (correlation != "correlated" && correlation != "independent") {
      throw std::invalid_argument("dataset: correlation must be 'correlated' or 'independent'");
    }
    if (label != "none" && label != "scalar" && label != "onehot") {
      throw std::invalid_argument("dataset: label must be 'none', 'scalar' or 'onehot'");
    }
    if (correlation == "independent" && label != "none") {
      throw std::invalid_argument(
          "dataset: labels are class-aligned and meaningless under independent "
          "correlation; use label 'none'");
    }
    if (!(grid > 0.0)) throw std::invalid_argument("dataset: grid must be > 0");
    if (modalities.empty()) throw std::invalid_argument("dataset: no modalities");
    std::set<std::string> names;
    for (const auto& m : modalities) {
      if (!detail::valid_identifier(m.name)) {
        throw std::invalid_argument("dataset: bad modality name '" + m.name + "'");
      }
      if (m.name == "label") throw std::invalid_argument("dataset: 'label' is reserved");
      if (!names.insert(m.name).second) {
        throw std::invalid_argument("dataset: duplicate modality '" + m.name + "'");
      }
      if (m.noise_std < 0.0) {
        throw std::invalid_argument("dataset: noise_std must be >= 0");
      }
    }
  }

  std::size_t rows() const { return classes * samples_per_class; }

  ordered_json to_json() const {
    ordered_json j;
    j["classes"] = classes;
    j["samples_per_class"] = samples_per_class;
    j["seed"] = seed;
    j["correlation"] = correlation;
    j["label"] = label;
    j["grid"] = grid;
    ordered_json mods = ordered_json::array();
    for (const auto& m : modalities) mods.push_back(m.to_json());
    j["modalities"] = mods;
    return j;
  }
  static DatasetSpec from_json(const ordered_json& j) {
    DatasetSpec s;
    s.classes = j.at("classes").get<std::size_t>();
    s.samples_per_class = j.at("samples_per_class").get<std::size_t>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.correlation = j.value("correlation", std::string("correlated"));
    s.label = j.value("label", std::string("none"));
    s.grid = j.value("grid", kDefaultGrid);
    for (const auto& m : j.at("modalities")) s.modalities.push_back(ModalitySpec::from_json(m));
    s.validate();
    return s;
  }
};

// Row-aligned columns of samples. Column order is presentation order; the
// label column (if any) always comes last.
class Dataset {
 public:
  struct Column {
    std::string name;
    Shape shape;
    bool scalar_header = false;  // header "name" instead of "name.0"
    std::vector<Sample> samples;
  };

  explicit Dataset(double grid = kDefaultGrid) : grid_(grid) {}

  double grid() const { return grid_; }
  std::size_t rows() const { return columns_.empty() ? 0 : columns_.front().samples.size(); }
  std::size_t column_count() const { return columns_.size(); }

  void add_column(Column col) {
    if (col.shape.count() == 0) throw std::invalid_argument("dataset: empty column shape");
    if (col.scalar_header && col.shape.count() != 1) {
      throw std::invalid_argument("dataset: scalar header needs a 1-value shape");
    }
    if (!columns_.empty() && col.samples.size() != rows()) {
      throw std::invalid_argument("dataset: column '" + col.name + "' has " +
                                  std::to_string(col.samples.size()) + " rows, expected " +
                                  std::to_string(rows()));
    }
    for (const Sample& s : col.samples) {
      if (s.shape() != col.shape) {
        throw std::invalid_argument("dataset: shape mismatch in column '" + col.name + "'");
      }
    }
    if (has_column(col.name)) {
      throw std::invalid_argument("dataset: duplicate column '" + col.name + "'");
    }
    columns_.push_back(std::move(col));
  }

  bool has_column(const std::string& name) const {
    for (const auto& c : columns_) {
      if (c.name == name) return true;
    }
    return false;
  }

  const Column& column(const std::string& name) const {
    for (const auto& c : columns_) {
      if (c.name == name) return c;
    }
    throw std::out_of_range("dataset: no column '" + name + "'");
  }

  const std::vector<Column>& columns() const { return columns_; }

  std::vector<std::string> column_names() const {
    std::vector<std::string> names;
    names.reserve(columns_.size());
    for (const auto& c : columns_) names.push_back(c.name);
    return names;
  }

  // Distinct values observed in one column.
  FiniteSet column_set(const std::string& name) const {
    const Column& c = column(name);
    return FiniteSet::from_samples(c.shape, grid_, c.samples);
  }

  // Row tuples over the named columns, in row order (duplicates preserved).
  std::vector<std::vector<Sample>> tuples(const std::vector<std::string>& names) const {
    std::vector<const Column*> cols;
    cols.reserve(names.size());
    for (const auto& n : names) cols.push_back(&column(n));
    std::vector<std::vector<Sample>> out;
    out.reserve(rows());
    for (std::size_t r = 0; r < rows(); ++r) {
      std::vector<Sample> t;
      t.reserve(cols.size());
      for (const Column* c : cols) t.push_back(c->samples[r]);
      out.push_back(std::move(t));
    }
    return out;
  }

  // Canonical CSV: header of flattened column names, then one line per row,
  // doubles in shortest round-trip form.
  std::string csv_string() const {
    std::string out;
    bool first = true;
    for (const auto& c : columns_) {
      if (c.scalar_header) {
        if (!first) out += ',';
        out += c.name;
        first = false;
      } else {
        for (std::size_t k = 0; k < c.shape.count(); ++k) {
          if (!first) out += ',';
          out += c.name + '.' + std::to_string(k);
          first = false;
        }
      }
    }
    out += '\n';
    for (std::size_t r = 0; r < rows(); ++r) {
      first = true;
      for (const auto& c : columns_) {
        const Sample& s = c.samples[r];
        for (std::size_t k = 0; k < s.size(); ++k) {
          if (!first) out += ',';
          out += detail::format_double(s[k]);
          first = false;
        }
      }
      out += '\n';
    }
    return out;
  }

  // FNV-1a over the canonical CSV bytes; identifies the content regardless of
  // any sidecar metadata.
  std::string fingerprint() const { return detail::hex64(detail::fnv1a(csv_string())); }

  ordered_json meta;  // carried into the sidecar verbatim (e.g. the spec)

 private:
  double grid_;
  std::vector<Column> columns_;
};

// --- generation ---------------------------------------------------------

namespace detail {

// Draw `classes` prototypes in [0,1]^count, each at least min_sep from all
// earlier ones after quantization. Deterministic for a given rng state.
inline std::vector<Sample> draw_prototypes(Rng& rng, const Shape& shape, std::size_t classes,
                                           double min_sep, double grid) {
  std::vector<Sample> protos;
  protos.reserve(classes);
  const std::size_t n = shape.count();
  for (std::size_t c = 0; c < classes; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < 20000 && !placed; ++attempt) {
      std::vector<double> v(n);
      for (double& x : v) x = rng.uniform();
      Sample cand = canonical_quantize(Sample(shape, std::move(v)), grid);
      placed = true;
      for (const Sample& p : protos) {
        if (distance(cand, p) < min_sep) {
          placed = false;
          break;
        }
      }
      if (placed) protos.push_back(std::move(cand));
    }
    if (!placed) {
      throw std::runtime_error("dataset: could not place " + std::to_string(classes) +
                               " prototypes at separation " + format_double(min_sep));
    }
  }
  return protos;
}

}  // namespace detail

// Deterministic generation: prototypes per modality (rejection-sampled for
// separation), then per-class noisy draws. With noise_std > 0 the draws are
// redrawn until distinct within the modality, so every row is unique; with
// noise_std == 0 each class contributes its prototype verbatim.
inline Dataset generate(const DatasetSpec& spec) {
  spec.validate();
  Dataset ds(spec.grid);

  std::vector<std::vector<Sample>> modality_rows;  // [modality][row]
  for (std::size_t mi = 0; mi < spec.modalities.size(); ++mi) {
    const ModalitySpec& m = spec.modalities[mi];
    Rng rng(detail::derive_seed(spec.seed, 0x100 + mi));
    const double min_sep = std::max(4.0 * m.noise_std, spec.grid);
    std::vector<Sample> protos =
        detail::draw_prototypes(rng, m.shape, spec.classes, min_sep, spec.grid);

    std::vector<Sample> rows;
    rows.reserve(spec.rows());
    std::set<Sample> seen;
    for (std::size_t c = 0; c < spec.classes; ++c) {
      for (std::size_t s = 0; s < spec.samples_per_class; ++s) {
        if (m.noise_std == 0.0) {
          rows.push_back(protos[c]);
          continue;
        }
        Sample drawn(m.shape, std::vector<double>(m.shape.count(), 0.0));
        bool fresh = false;
        for (int attempt = 0; attempt < 20000 && !fresh; ++attempt) {
          std::vector<double> v(m.shape.count());
          for (std::size_t k = 0; k < v.size(); ++k) {
            v[k] = protos[c][k] + m.noise_std * rng.gaussian();
          }
          drawn = canonical_quantize(Sample(m.shape, std::move(v)), spec.grid);
          fresh = seen.insert(drawn).second;
        }
        if (!fresh) {
          throw std::runtime_error("dataset: could not draw distinct samples for modality '" +
                                   m.name + "'");
        }
        rows.push_back(std::move(drawn));
      }
    }
    modality_rows.push_back(std::move(rows));
  }

  if (spec.correlation == "independent") {
    for (std::size_t mi = 0; mi < modality_rows.size(); ++mi) {
      Rng rng(detail::derive_seed(spec.seed, 0x9000 + mi));
      auto& rows = modality_rows[mi];
      for (std::size_t i = rows.size(); i > 1; --i) {
        std::swap(rows[i - 1], rows[rng.index(i)]);
      }
    }
  }

  for (std::size_t mi = 0; mi < spec.modalities.size(); ++mi) {
    Dataset::Column col;
    col.name = spec.modalities[mi].name;
    col.shape = spec.modalities[mi].shape;
    col.samples = std::move(modality_rows[mi]);
    ds.add_column(std::move(col));
  }

  if (spec.label != "none") {
    Dataset::Column col;
    col.name = "label";
    if (spec.label == "scalar") {
      col.shape = Shape({1});
      col.scalar_header = true;
      for (std::size_t c = 0; c < spec.classes; ++c) {
        for (std::size_t s = 0; s < spec.samples_per_class; ++s) {
          col.samples.push_back(Sample(col.shape, {static_cast<double>(c)}));
        }
      }
    } else {  // onehot
      col.shape = Shape({spec.classes});
      for (std::size_t c = 0; c < spec.classes; ++c) {
        std::vector<double> v(spec.classes, 0.0);
        v[c] = 1.0;
        Sample s(col.shape, v);
        for (std::size_t k = 0; k < spec.samples_per_class; ++k) col.samples.push_back(s);
      }
    }
    ds.add_column(std::move(col));
  }

  ds.meta = spec.to_json();
  return ds;
}

// --- persistence --------------------------------------------------------

// Writes <path> (CSV) and a sidecar <stem>.json next to it.
inline void save_rows(const Dataset& ds, const std::filesystem::path& csv_path) {
  const std::string body = ds.csv_string();
  {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + csv_path.string());
    out << body;
  }
  ordered_json side;
  side["format"] = "drf-dataset";
  side["version"] = 1;
  side["grid"] = ds.grid();
  side["rows"] = ds.rows();
  side["fingerprint"] = detail::hex64(detail::fnv1a(body));
  ordered_json cols = ordered_json::array();
  for (const auto& c : ds.columns()) {
    ordered_json jc;
    jc["name"] = c.name;
    jc["shape"] = c.shape.to_json();
    jc["scalar_header"] = c.scalar_header;
    cols.push_back(jc);
  }
  side["columns"] = cols;
  if (!ds.meta.is_null() && !ds.meta.empty()) side["spec"] = ds.meta;

  std::filesystem::path side_path = csv_path;
  side_path.replace_extension(".json");
  std::ofstream out(side_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + side_path.string());
  out << side.dump(2) << '\n';
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

}  // namespace detail

// Reads a CSV written by save_rows. If the sidecar is present it supplies
// shapes, grid and the stored fingerprint (returned via *stored_fingerprint);
// without it every flattened group name.0..name.k becomes a flat column.
inline Dataset load_rows(const std::filesystem::path& csv_path,
                         std::string* stored_fingerprint = nullptr) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + csv_path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(csv_path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = detail::split_csv_line(line);

  // group flattened headers into columns
  struct Group {
    std::string name;
    std::size_t width = 0;
    bool scalar_header = false;
  };
  std::vector<Group> groups;
  for (const std::string& h : header) {
    std::string base = h;
    bool indexed = false;
    std::size_t index = 0;
    const std::size_t dot = h.rfind('.');
    if (dot != std::string::npos && dot + 1 < h.size()) {
      const std::string suffix = h.substr(dot + 1);
      if (std::all_of(suffix.begin(), suffix.end(),
                      [](unsigned char c) { return std::isdigit(c); })) {
        base = h.substr(0, dot);
        index = static_cast<std::size_t>(std::stoull(suffix));
        indexed = true;
      }
    }
    if (!groups.empty() && groups.back().name == base && indexed &&
        index == groups.back().width) {
      ++groups.back().width;
    } else {
      if (indexed && index != 0) {
        throw std::runtime_error(csv_path.string() + ": header '" + h +
                                 "' starts a group at index " + std::to_string(index));
      }
      groups.push_back({base, 1, !indexed});
    }
  }

  ordered_json side;
  {
    std::filesystem::path side_path = csv_path;
    side_path.replace_extension(".json");
    std::ifstream sin(side_path, std::ios::binary);
    if (sin) side = ordered_json::parse(sin);
  }
  const double grid = side.is_null() ? kDefaultGrid : side.value("grid", kDefaultGrid);
  if (stored_fingerprint) {
    *stored_fingerprint = side.is_null() ? std::string() : side.value("fingerprint", std::string());
  }

  // sidecar shapes override the flat ones inferred from the header
  std::map<std::string, Shape> shapes;
  if (!side.is_null() && side.contains("columns")) {
    for (const auto& jc : side.at("columns")) {
      shapes.emplace(jc.at("name").get<std::string>(), Shape::from_json(jc.at("shape")));
    }
  }

  Dataset ds(grid);
  std::vector<Dataset::Column> cols;
  std::size_t total_fields = 0;
  for (const Group& g : groups) {
    Dataset::Column c;
    c.name = g.name;
    auto it = shapes.find(g.name);
    c.shape = it != shapes.end() ? it->second : Shape({g.width});
    if (c.shape.count() != g.width) {
      throw std::runtime_error(csv_path.string() + ": column '" + g.name + "' has " +
                               std::to_string(g.width) + " fields but sidecar shape holds " +
                               std::to_string(c.shape.count()));
    }
    c.scalar_header = g.scalar_header;
    total_fields += g.width;
    cols.push_back(std::move(c));
  }

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = detail::split_csv_line(line);
    if (fields.size() != total_fields) {
      throw std::runtime_error(csv_path.string() + ": line " + std::to_string(lineno) +
                               ": expected " + std::to_string(total_fields) + " fields, got " +
                               std::to_string(fields.size()));
    }
    std::size_t f = 0;
    for (Dataset::Column& c : cols) {
      std::vector<double> v(c.shape.count());
      for (std::size_t k = 0; k < v.size(); ++k, ++f) {
        double x;
        try {
          x = detail::parse_double(fields[f]);
        } catch (const std::exception& e) {
          throw std::runtime_error(csv_path.string() + ": line " + std::to_string(lineno) +
                                   ", column '" + header[f] + "': " + e.what());
        }
        if (!std::isfinite(x)) {
          throw std::runtime_error(csv_path.string() + ": line " + std::to_string(lineno) +
                                   ", column '" + header[f] + "': non-finite value");
        }
        v[k] = x;
      }
      c.samples.push_back(Sample(c.shape, std::move(v)));
    }
  }

  for (auto& c : cols) ds.add_column(std::move(c));
  if (!side.is_null() && side.contains("spec")) ds.meta = side.at("spec");
  return ds;
}

}  // namespace drf
