#include "bsds/io.hpp"

#include "bsds/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace bsds {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(field);
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  out.push_back(field);
  return out;
}

struct CsvFile {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_numbers;  // 1-based line numbers for messages
};

CsvFile read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path.string());
  CsvFile file;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::size_t colon = line.find(':');
      if (colon != std::string::npos) {
        std::string key = line.substr(1, colon - 1);
        std::string value = line.substr(colon + 1);
        const auto trim = [](std::string& s) {
          while (!s.empty() && s.front() == ' ') s.erase(s.begin());
          while (!s.empty() && s.back() == ' ') s.pop_back();
        };
        trim(key);
        trim(value);
        file.metadata.emplace_back(key, value);
      }
      continue;
    }
    if (!have_header) {
      file.header = split_csv(line);
      have_header = true;
    } else {
      file.rows.push_back(split_csv(line));
      file.row_numbers.push_back(line_no);
    }
  }
  if (!have_header)
    throw io_error(path.string() + ": missing header row");
  return file;
}

double parse_double(const std::string& s, const std::string& context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing characters");
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite");
    return v;
  } catch (const std::exception&) {
    throw io_error(context + ": '" + s + "' is not a finite number");
  }
}

std::string row_context(const std::filesystem::path& path, std::size_t row_no,
                        const std::string& column) {
  std::ostringstream os;
  os << path.string() << " row " << row_no << " column '" << column << "'";
  return os.str();
}

const char* kReportBanner = "# bsds report v1";

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string config_hash(const std::string& canonical_config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_config) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

PoolData load_pool(const std::filesystem::path& path) {
  const CsvFile file = read_csv(path);

  std::int64_t id_col = -1, label_col = -1, group_col = -1, fp_col = -1,
               prior_col = -1, admet_col = -1;
  std::vector<std::int64_t> feature_cols;
  std::vector<std::string> feature_names;
  for (std::size_t c = 0; c < file.header.size(); ++c) {
    const std::string& name = file.header[c];
    if (name == "id") id_col = static_cast<std::int64_t>(c);
    else if (name == "label") label_col = static_cast<std::int64_t>(c);
    else if (name == "group") group_col = static_cast<std::int64_t>(c);
    else if (name == "fingerprint") fp_col = static_cast<std::int64_t>(c);
    else if (name == "prior") prior_col = static_cast<std::int64_t>(c);
    else if (name == "admet") admet_col = static_cast<std::int64_t>(c);
    else {
      feature_cols.push_back(static_cast<std::int64_t>(c));
      feature_names.push_back(name);
    }
  }
  if (id_col < 0) throw io_error(path.string() + ": missing 'id' column");
  if (label_col < 0) throw io_error(path.string() + ": missing 'label' column");
  if (file.rows.empty()) throw io_error(path.string() + ": no candidate rows");

  const std::size_t n = file.rows.size();
  std::vector<std::string> ids(n);
  std::vector<std::uint8_t> labels(n);
  std::vector<std::string> groups;
  std::vector<Fingerprint> fingerprints;
  Eigen::VectorXd prior, admet;
  if (group_col >= 0) groups.resize(n);
  if (fp_col >= 0) fingerprints.resize(n);
  if (prior_col >= 0) prior.resize(static_cast<Eigen::Index>(n));
  if (admet_col >= 0) admet.resize(static_cast<Eigen::Index>(n));
  Eigen::MatrixXd features(n, feature_cols.size());

  std::unordered_set<std::string> seen_ids;
  seen_ids.reserve(n);
  std::int64_t fp_width = -1;

  for (std::size_t r = 0; r < n; ++r) {
    const auto& row = file.rows[r];
    const std::size_t row_no = file.row_numbers[r];
    if (row.size() != file.header.size()) {
      std::ostringstream os;
      os << path.string() << " row " << row_no << ": expected "
         << file.header.size() << " fields, got " << row.size();
      throw io_error(os.str());
    }

    ids[r] = row[static_cast<std::size_t>(id_col)];
    if (ids[r].empty())
      throw io_error(row_context(path, row_no, "id") + ": empty id");
    if (!seen_ids.insert(ids[r]).second)
      throw io_error(row_context(path, row_no, "id") + ": duplicate id '" +
                     ids[r] + "'");

    const std::string& label = row[static_cast<std::size_t>(label_col)];
    if (label == "0") labels[r] = 0;
    else if (label == "1") labels[r] = 1;
    else
      throw io_error(row_context(path, row_no, "label") + ": '" + label +
                     "' is not 0 or 1");

    if (group_col >= 0) groups[r] = row[static_cast<std::size_t>(group_col)];

    if (fp_col >= 0) {
      const std::string& hex = row[static_cast<std::size_t>(fp_col)];
      if (fp_width < 0) fp_width = static_cast<std::int64_t>(hex.size()) * 4;
      if (static_cast<std::int64_t>(hex.size()) * 4 != fp_width)
        throw io_error(row_context(path, row_no, "fingerprint") +
                       ": ragged fingerprint width");
      try {
        fingerprints[r] = Fingerprint::from_hex(hex, static_cast<std::int32_t>(fp_width));
      } catch (const std::exception& e) {
        throw io_error(row_context(path, row_no, "fingerprint") + ": " + e.what());
      }
    }

    for (std::size_t k = 0; k < feature_cols.size(); ++k)
      features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) =
          parse_double(row[static_cast<std::size_t>(feature_cols[k])],
                       row_context(path, row_no, feature_names[k]));

    if (prior_col >= 0) {
      const double v = parse_double(row[static_cast<std::size_t>(prior_col)],
                                    row_context(path, row_no, "prior"));
      if (v < 0.0 || v > 1.0)
        throw io_error(row_context(path, row_no, "prior") + ": outside [0,1]");
      prior[static_cast<Eigen::Index>(r)] = v;
    }
    if (admet_col >= 0) {
      const double v = parse_double(row[static_cast<std::size_t>(admet_col)],
                                    row_context(path, row_no, "admet"));
      if (v < 0.0 || v > 1.0)
        throw io_error(row_context(path, row_no, "admet") + ": outside [0,1]");
      admet[static_cast<Eigen::Index>(r)] = v;
    }
  }

  PoolData out;
  out.pool = make_labeled_pool(std::move(ids), std::move(labels));
  out.features = std::move(features);
  out.feature_names = std::move(feature_names);
  out.fingerprints = std::move(fingerprints);
  out.groups = std::move(groups);
  out.prior = std::move(prior);
  out.admet = std::move(admet);
  return out;
}

void write_pool(const PoolData& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path.string());
  out << "# bsds pool v1\n";
  out << "id,label";
  if (data.has_groups()) out << ",group";
  if (data.has_fingerprints()) out << ",fingerprint";
  for (const std::string& name : data.feature_names) out << "," << name;
  if (data.has_prior()) out << ",prior";
  if (data.has_admet()) out << ",admet";
  out << "\n";
  const std::int64_t n = data.pool.size();
  for (std::int64_t i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    out << data.pool.ids[r] << "," << static_cast<int>(data.pool.labels[r]);
    if (data.has_groups()) out << "," << data.groups[r];
    if (data.has_fingerprints()) out << "," << data.fingerprints[r].to_hex();
    for (Eigen::Index c = 0; c < data.features.cols(); ++c)
      out << "," << format_double(data.features(i, c));
    if (data.has_prior()) out << "," << format_double(data.prior[i]);
    if (data.has_admet()) out << "," << format_double(data.admet[i]);
    out << "\n";
  }
  if (!out) throw io_error("write failed for " + path.string());
}

ScoreTable load_scores(const std::filesystem::path& path, const LabeledPool& pool,
                       const LoadScoresOptions& options) {
  const CsvFile file = read_csv(path);
  std::int64_t id_col = -1, score_col = -1;
  for (std::size_t c = 0; c < file.header.size(); ++c) {
    if (file.header[c] == "id") id_col = static_cast<std::int64_t>(c);
    else if (file.header[c] == "score") score_col = static_cast<std::int64_t>(c);
  }
  if (id_col < 0 || score_col < 0)
    throw io_error(path.string() + ": needs 'id' and 'score' columns");

  std::unordered_map<std::string, std::int64_t> index_of;
  index_of.reserve(static_cast<std::size_t>(pool.size()));
  for (std::int64_t i = 0; i < pool.size(); ++i)
    index_of.emplace(pool.ids[static_cast<std::size_t>(i)], i);

  Eigen::VectorXd values =
      Eigen::VectorXd::Constant(pool.size(), options.default_value);
  std::vector<char> filled(static_cast<std::size_t>(pool.size()), 0);
  for (std::size_t r = 0; r < file.rows.size(); ++r) {
    const auto& row = file.rows[r];
    const std::size_t row_no = file.row_numbers[r];
    if (row.size() != file.header.size())
      throw io_error(path.string() + " row " + std::to_string(row_no) +
                     ": wrong field count");
    const std::string& id = row[static_cast<std::size_t>(id_col)];
    const auto it = index_of.find(id);
    if (it == index_of.end())
      throw io_error(row_context(path, row_no, "id") + ": unknown id '" + id + "'");
    values[it->second] = parse_double(row[static_cast<std::size_t>(score_col)],
                                      row_context(path, row_no, "score"));
    filled[static_cast<std::size_t>(it->second)] = 1;
  }

  std::int64_t missing = 0;
  std::string first_missing;
  for (std::int64_t i = 0; i < pool.size(); ++i)
    if (!filled[static_cast<std::size_t>(i)]) {
      ++missing;
      if (first_missing.empty()) first_missing = pool.ids[static_cast<std::size_t>(i)];
    }
  if (missing > 0 && options.strict)
    throw io_error(path.string() + ": missing score for id '" + first_missing +
                   "' (" + std::to_string(missing) + " missing in total)");

  std::string provenance = path.filename().string();
  bool calibrated = false;
  for (const auto& [key, value] : file.metadata) {
    if (key == "provenance") provenance = value;
    if (key == "calibrated") calibrated = (value == "true" || value == "1");
  }
  ScoreTable table = make_score_table(std::move(values), provenance, calibrated);
  return table;
}

void write_scores(const ScoreTable& table, const LabeledPool& pool,
                  const std::filesystem::path& path) {
  if (table.values.size() != pool.size())
    throw std::invalid_argument("score table not aligned to pool");
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path.string());
  out << "# bsds scores v1\n";
  out << "# provenance: " << table.provenance << "\n";
  out << "# calibrated: " << (table.calibrated_probability ? "true" : "false")
      << "\n";
  out << "id,score\n";
  for (std::int64_t i = 0; i < pool.size(); ++i)
    out << pool.ids[static_cast<std::size_t>(i)] << ","
        << format_double(table.values[i]) << "\n";
  if (!out) throw io_error("write failed for " + path.string());
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n < 10) throw std::invalid_argument("synthetic pool needs n >= 10");
  if (!(spec.prevalence > 0.0 && spec.prevalence < 1.0))
    throw std::invalid_argument("synthetic prevalence must lie in (0,1)");
  if (!(spec.target_auroc > 0.0 && spec.target_auroc < 1.0))
    throw std::invalid_argument("synthetic target AUROC must lie in (0,1)");
  if (spec.fingerprint_width <= 0 || spec.fingerprint_width % 64 != 0)
    throw std::invalid_argument("fingerprint width must be a positive multiple of 64");
  if (spec.hit_clusters <= 0)
    throw std::invalid_argument("synthetic spec needs >= 1 hit cluster");

  const std::int64_t n = spec.n;
  const auto hit_target = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(
             std::floor(spec.prevalence * static_cast<double>(n) + 0.5)));
  if (hit_target >= n)
    throw std::invalid_argument("synthetic prevalence plants no non-hits");

  // Exact hit count: shuffle positions, first hit_target become hits.
  std::vector<std::uint8_t> labels(static_cast<std::size_t>(n), 0);
  {
    Rng rng(derive_stream({spec.seed, stream_purpose::synthetic, 0}));
    std::vector<std::int32_t> pos(static_cast<std::size_t>(n));
    std::iota(pos.begin(), pos.end(), 0);
    for (std::int64_t i = 0; i < hit_target; ++i) {
      const std::uint64_t j = i + rng.next_below(static_cast<std::uint64_t>(n - i));
      std::swap(pos[static_cast<std::size_t>(i)], pos[static_cast<std::size_t>(j)]);
    }
    for (std::int64_t i = 0; i < hit_target; ++i)
      labels[static_cast<std::size_t>(pos[static_cast<std::size_t>(i)])] = 1;
  }

  const double delta =
      (spec.target_auroc == 0.5)
          ? 0.0
          : std::sqrt(2.0) * norm_ppf(spec.target_auroc);

  LabeledPool pool;
  {
    std::vector<std::string> ids(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
      char buf[24];
      std::snprintf(buf, sizeof(buf), "c%06lld", static_cast<long long>(i));
      ids[static_cast<std::size_t>(i)] = buf;
    }
    pool = make_labeled_pool(std::move(ids), std::vector<std::uint8_t>(labels));
  }

  // Rejection loop on the latent scores until the realized AUROC lands
  // within tolerance.
  Eigen::VectorXd latent(n);
  double realized = 0.5;
  std::int32_t attempts = 0;
  constexpr std::int32_t kMaxAttempts = 200;
  for (;;) {
    ++attempts;
    if (attempts > kMaxAttempts)
      throw std::invalid_argument(
          "synthetic target separation unreachable within tolerance");
    Rng rng(derive_stream({spec.seed, stream_purpose::synthetic, 1,
                           static_cast<std::uint64_t>(attempts)}));
    for (std::int64_t i = 0; i < n; ++i)
      latent[i] = rng.next_normal() +
                  (labels[static_cast<std::size_t>(i)] ? delta : 0.0);
    ScoreTable probe = make_score_table(latent, "probe");
    const AuxiliaryMetrics aux = auxiliary_metrics(pool, probe, std::max<std::int64_t>(1, n / 100));
    realized = aux.auroc;
    if (std::abs(realized - spec.target_auroc) <= spec.auroc_tolerance) break;
  }

  Eigen::VectorXd score_values(n);
  for (std::int64_t i = 0; i < n; ++i)
    score_values[i] = 1.0 / (1.0 + std::exp(-latent[i]));

  PoolData data;
  data.pool = std::move(pool);

  // Six feature columns with mixed signal strength, then prior and admet.
  {
    Rng rng(derive_stream({spec.seed, stream_purpose::synthetic, 2}));
    const double coeff[6] = {0.8, 0.5, 0.3, 0.0, 0.0, -0.4};
    data.features.resize(n, 6);
    data.feature_names = {"feat_1", "feat_2", "feat_3",
                          "feat_4", "feat_5", "feat_6"};
    for (std::int64_t i = 0; i < n; ++i)
      for (int c = 0; c < 6; ++c)
        data.features(i, c) = coeff[c] * latent[i] + rng.next_normal();
    data.prior.resize(n);
    data.admet.resize(n);
    for (std::int64_t i = 0; i < n; ++i) {
      const double p = 0.5 * latent[i] + 0.8 * rng.next_normal();
      data.prior[i] = 1.0 / (1.0 + std::exp(-p));
      const double a = 0.3 * latent[i] + rng.next_normal();
      const double compliant = std::floor(5.0 / (1.0 + std::exp(-a)) + 0.5);
      data.admet[i] = std::clamp(compliant, 0.0, 5.0) / 5.0;
    }
  }

  // Fingerprints: cluster cores for hits, background bits for everyone.
  {
    Rng rng(derive_stream({spec.seed, stream_purpose::synthetic, 3}));
    const std::int32_t width = spec.fingerprint_width;
    std::vector<std::vector<std::int32_t>> cores(
        static_cast<std::size_t>(spec.hit_clusters));
    for (auto& core : cores) {
      core.reserve(static_cast<std::size_t>(spec.cluster_core_bits));
      for (std::int32_t b = 0; b < spec.cluster_core_bits; ++b)
        core.push_back(static_cast<std::int32_t>(
            rng.next_below(static_cast<std::uint64_t>(width))));
    }
    data.fingerprints.resize(static_cast<std::size_t>(n));
    data.groups.resize(static_cast<std::size_t>(n));
    std::int64_t bg_counter = 0;
    for (std::int64_t i = 0; i < n; ++i) {
      Fingerprint fp = Fingerprint::zeros(width);
      for (std::int32_t b = 0; b < width; ++b)
        if (rng.next_double() < spec.background_bit_density) fp.set_bit(b);
      if (labels[static_cast<std::size_t>(i)]) {
        const auto cluster = static_cast<std::size_t>(
            rng.next_below(static_cast<std::uint64_t>(spec.hit_clusters)));
        for (std::int32_t b : cores[cluster]) fp.set_bit(b);
        data.groups[static_cast<std::size_t>(i)] =
            "hitclust_" + std::to_string(cluster);
      } else {
        data.groups[static_cast<std::size_t>(i)] =
            "bg_" + std::to_string(bg_counter++ / 5);
      }
      data.fingerprints[static_cast<std::size_t>(i)] = std::move(fp);
    }
  }

  SyntheticData out;
  out.scores = make_score_table(std::move(score_values), "synthetic-ml", true);
  out.data = std::move(data);
  out.realized_auroc = realized;
  out.attempts = attempts;
  return out;
}

std::vector<std::vector<std::int32_t>> grouped_folds(
    const LabeledPool& pool, std::int32_t fold_count, FoldMode mode,
    std::span<const std::string> groups, Rng& rng) {
  if (fold_count < 2) throw std::invalid_argument("need at least 2 folds");
  if (fold_count > pool.size())
    throw std::invalid_argument("more folds than candidates");

  std::vector<std::vector<std::int32_t>> folds(
      static_cast<std::size_t>(fold_count));

  if (mode == FoldMode::kRandomStratified) {
    std::vector<std::int32_t> hits, others;
    for (std::int32_t i = 0; i < pool.size(); ++i)
      (pool.labels[static_cast<std::size_t>(i)] ? hits : others).push_back(i);
    const auto shuffle = [&rng](std::vector<std::int32_t>& v) {
      for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        const std::uint64_t j = i + rng.next_below(v.size() - i);
        std::swap(v[i], v[j]);
      }
    };
    shuffle(hits);
    shuffle(others);
    // Deal hits round-robin, then continue the rotation with the rest so
    // both hit counts and fold sizes differ by at most one.
    std::size_t next = 0;
    for (std::int32_t i : hits) {
      folds[next % folds.size()].push_back(i);
      ++next;
    }
    for (std::int32_t i : others) {
      folds[next % folds.size()].push_back(i);
      ++next;
    }
  } else {
    if (groups.size() != static_cast<std::size_t>(pool.size()))
      throw std::invalid_argument("byGroup folds need a group label per candidate");
    std::map<std::string, std::vector<std::int32_t>> by_group;
    for (std::int32_t i = 0; i < pool.size(); ++i)
      by_group[groups[static_cast<std::size_t>(i)]].push_back(i);
    if (static_cast<std::int64_t>(by_group.size()) < fold_count)
      throw std::invalid_argument("fewer groups than folds");

    std::vector<const std::vector<std::int32_t>*> group_list;
    group_list.reserve(by_group.size());
    for (const auto& [name, members] : by_group) group_list.push_back(&members);
    // Seeded shuffle, then stable sort by size: equal-size groups land in
    // random order, largest-first otherwise.
    for (std::size_t i = 0; i + 1 < group_list.size(); ++i) {
      const std::uint64_t j = i + rng.next_below(group_list.size() - i);
      std::swap(group_list[i], group_list[j]);
    }
    std::stable_sort(group_list.begin(), group_list.end(),
                     [](const auto* a, const auto* b) { return a->size() > b->size(); });
    for (const auto* members : group_list) {
      std::size_t smallest = 0;
      for (std::size_t f = 1; f < folds.size(); ++f)
        if (folds[f].size() < folds[smallest].size()) smallest = f;
      folds[smallest].insert(folds[smallest].end(), members->begin(), members->end());
    }
  }

  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

// ---------------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------------

namespace {

std::string na_or(double value, bool defined) {
  return defined ? format_double(value) : std::string("na");
}

class ReportWriter {
 public:
  ReportWriter(const std::filesystem::path& dir, const std::string& hash)
      : dir_(dir), hash_(hash) {}

  std::ofstream open(const std::string& name,
                     std::vector<std::filesystem::path>& written) {
    const std::filesystem::path p = dir_ / name;
    std::ofstream out(p);
    if (!out) throw io_error("cannot write " + p.string());
    out << kReportBanner << "\n";
    out << "# config_hash: " << hash_ << "\n";
    written.push_back(p);
    return out;
  }

 private:
  std::filesystem::path dir_;
  std::string hash_;
};

}  // namespace

std::vector<std::filesystem::path> emit_report(
    const ReportBundle& bundle, ReportFormat format,
    const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;

  if (format == ReportFormat::kTabular) {
    ReportWriter writer(out_dir, bundle.config_hash);

    if (!bundle.metrics.empty()) {
      auto out = writer.open("metrics.csv", written);
      out << "proposer,fraction,budget,hr,fdr,cov,tp,selected,ppv,bsds,"
             "degenerate_pool\n";
      for (const MetricRow& m : bundle.metrics)
        out << m.proposer << "," << format_double(m.fraction) << "," << m.budget
            << "," << format_double(m.rates.hr) << "," << format_double(m.rates.fdr)
            << "," << format_double(m.rates.cov) << "," << m.rates.tp << ","
            << m.rates.selected << "," << format_double(m.rates.ppv) << ","
            << format_double(m.bsds) << "," << (m.rates.degenerate_pool ? 1 : 0)
            << "\n";
    }

    if (!bundle.dqs_rows.empty()) {
      auto out = writer.open("dqs.csv", written);
      out << "proposer,dqs,boot_mean,ci_lo,ci_hi,replicates,degenerate_interval\n";
      for (const DqsRow& d : bundle.dqs_rows) {
        out << d.proposer << "," << format_double(d.dqs_seed0);
        if (d.summary) {
          out << "," << format_double(d.summary->replicate_mean) << ","
              << format_double(d.summary->interval.lo) << ","
              << format_double(d.summary->interval.hi) << ","
              << d.summary->replicate_count << ","
              << (d.summary->interval.degenerate ? 1 : 0);
        } else {
          out << ",na,na,na,0,0";
        }
        out << "\n";
      }
    }

    if (!bundle.budget_summaries.empty()) {
      auto out = writer.open("bsds_budgets.csv", written);
      out << "proposer,fraction,budget,bsds,boot_mean,ci_lo,ci_hi,replicates\n";
      for (const BudgetSummaryRow& b : bundle.budget_summaries)
        out << b.proposer << "," << format_double(b.fraction) << "," << b.budget
            << "," << format_double(b.bsds_seed0) << ","
            << format_double(b.summary.replicate_mean) << ","
            << format_double(b.summary.interval.lo) << ","
            << format_double(b.summary.interval.hi) << ","
            << b.summary.replicate_count << "\n";
    }

    if (!bundle.auxiliary.empty()) {
      auto out = writer.open("auxiliary.csv", written);
      out << "table,fraction,budget,ef,auroc,mcc\n";
      for (const AuxiliaryRow& a : bundle.auxiliary)
        out << a.table << "," << format_double(a.fraction) << "," << a.budget
            << "," << na_or(a.metrics.ef, a.metrics.ef_defined) << ","
            << na_or(a.metrics.auroc, a.metrics.auroc_defined) << ","
            << na_or(a.metrics.mcc, a.metrics.mcc_defined) << "\n";
    }

    if (!bundle.distributions.empty()) {
      auto out = writer.open("distributions.csv", written);
      out << "proposer,seed,dqs\n";
      for (const DistributionRow& d : bundle.distributions)
        out << d.proposer << "," << d.seed << "," << format_double(d.dqs) << "\n";
    }

    if (!bundle.sensitivity.empty()) {
      {
        auto out = writer.open("sensitivity_dqs.csv", written);
        out << "lambda,gamma,proposer,dqs\n";
        for (const SensitivityCell& cell : bundle.sensitivity)
          for (std::size_t p = 0; p < cell.dqs.size(); ++p)
            out << format_double(cell.lambda) << "," << format_double(cell.gamma)
                << "," << bundle.sensitivity_proposers[p] << ","
                << format_double(cell.dqs[p]) << "\n";
      }
      {
        auto out = writer.open("sensitivity_tau.csv", written);
        out << "lambda,gamma,tau\n";
        for (const SensitivityCell& cell : bundle.sensitivity)
          out << format_double(cell.lambda) << "," << format_double(cell.gamma)
              << "," << format_double(cell.tau_vs_default) << "\n";
      }
    }

    if (!bundle.deployment.empty()) {
      auto out = writer.open("deployment.csv", written);
      out << "strategy,budget,hits,hit_rate,cost,roi_percent\n";
      for (const DeploymentRow& d : bundle.deployment)
        out << d.strategy << "," << d.budget << "," << d.hits << ","
            << format_double(d.hit_rate) << "," << format_double(d.cost) << ","
            << format_double(d.roi * 100.0) << "\n";
    }

    if (!bundle.temperatures.empty()) {
      auto out = writer.open("temperature.csv", written);
      out << "temperature,dqs\n";
      for (const TemperatureRow& t : bundle.temperatures)
        out << format_double(t.temperature) << "," << format_double(t.dqs) << "\n";
    }

    if (!bundle.notes.empty()) {
      auto out = writer.open("notes.txt", written);
      for (const std::string& note : bundle.notes) out << note << "\n";
    }
    return written;
  }

  // Structured text: one JSON document, stable key order.
  const std::filesystem::path p = out_dir / "report.json";
  std::ofstream out(p);
  if (!out) throw io_error("cannot write " + p.string());
  written.push_back(p);

  const auto num = [](double v) { return format_double(v); };
  out << "{\n";
  out << "  \"config_hash\": \"" << bundle.config_hash << "\",\n";
  out << "  \"metrics\": [";
  for (std::size_t i = 0; i < bundle.metrics.size(); ++i) {
    const MetricRow& m = bundle.metrics[i];
    out << (i ? ",\n    " : "\n    ");
    out << "{\"proposer\": \"" << m.proposer << "\", \"fraction\": "
        << num(m.fraction) << ", \"budget\": " << m.budget
        << ", \"hr\": " << num(m.rates.hr) << ", \"fdr\": " << num(m.rates.fdr)
        << ", \"cov\": " << num(m.rates.cov) << ", \"tp\": " << m.rates.tp
        << ", \"bsds\": " << num(m.bsds) << "}";
  }
  out << "\n  ],\n";
  out << "  \"dqs\": [";
  for (std::size_t i = 0; i < bundle.dqs_rows.size(); ++i) {
    const DqsRow& d = bundle.dqs_rows[i];
    out << (i ? ",\n    " : "\n    ");
    out << "{\"proposer\": \"" << d.proposer << "\", \"dqs\": "
        << num(d.dqs_seed0);
    if (d.summary)
      out << ", \"boot_mean\": " << num(d.summary->replicate_mean)
          << ", \"ci_lo\": " << num(d.summary->interval.lo)
          << ", \"ci_hi\": " << num(d.summary->interval.hi)
          << ", \"replicates\": " << d.summary->replicate_count;
    out << "}";
  }
  out << "\n  ],\n";
  out << "  \"notes\": [";
  for (std::size_t i = 0; i < bundle.notes.size(); ++i)
    out << (i ? ", " : "") << "\"" << bundle.notes[i] << "\"";
  out << "]\n";
  out << "}\n";
  if (!out) throw io_error("write failed for " + p.string());
  return written;
}

std::vector<std::pair<std::string, double>> read_dqs_table(
    const std::filesystem::path& path) {
  const CsvFile file = read_csv(path);
  std::int64_t name_col = -1, dqs_col = -1;
  for (std::size_t c = 0; c < file.header.size(); ++c) {
    if (file.header[c] == "proposer") name_col = static_cast<std::int64_t>(c);
    if (file.header[c] == "dqs") dqs_col = static_cast<std::int64_t>(c);
  }
  if (name_col < 0 || dqs_col < 0)
    throw io_error(path.string() + ": needs 'proposer' and 'dqs' columns");
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t r = 0; r < file.rows.size(); ++r)
    out.emplace_back(file.rows[r][static_cast<std::size_t>(name_col)],
                     parse_double(file.rows[r][static_cast<std::size_t>(dqs_col)],
                                  row_context(path, file.row_numbers[r], "dqs")));
  return out;
}

}  // namespace bsds
