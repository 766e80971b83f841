#include "albudget/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "albudget/error.hpp"
#include "albudget/rng.hpp"

namespace albudget {

std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

double parse_double(const std::string& token) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  const auto result = std::from_chars(first, last, value);
  if (result.ec != std::errc{} || result.ptr != last) {
    fail(ErrorKind::format, "not a number: '" + token + "'");
  }
  return value;
}

const Instance& Dataset::train_by_id(std::int64_t id) const {
  const auto it = train_index_.find(id);
  if (it == train_index_.end()) {
    fail(ErrorKind::not_found, "train instance id " + std::to_string(id));
  }
  return train[it->second];
}

void Dataset::finalize() {
  if (feature_dim < 1) fail(ErrorKind::format, "feature_dim must be >= 1");
  if (class_count < 1) fail(ErrorKind::format, "class_count must be >= 1");

  std::set<std::int64_t> seen;
  for (const auto* split : {&train, &test}) {
    for (const Instance& inst : *split) {
      if (inst.id < 0) fail(ErrorKind::format, "negative id " + std::to_string(inst.id));
      if (!seen.insert(inst.id).second) {
        fail(ErrorKind::format, "duplicate id " + std::to_string(inst.id));
      }
      if (static_cast<int>(inst.features.size()) != feature_dim) {
        fail(ErrorKind::format, "id " + std::to_string(inst.id) + ": expected " +
                                    std::to_string(feature_dim) + " features, got " +
                                    std::to_string(inst.features.size()));
      }
      for (double v : inst.features) {
        if (!std::isfinite(v)) {
          fail(ErrorKind::format, "id " + std::to_string(inst.id) + ": non-finite feature");
        }
      }
      if (inst.label < 0 || inst.label >= class_count) {
        fail(ErrorKind::format, "id " + std::to_string(inst.id) + ": label " +
                                    std::to_string(inst.label) + " out of range [0," +
                                    std::to_string(class_count) + ")");
      }
    }
  }
  // ids must be dense 0..N-1 over both splits
  const std::int64_t n = static_cast<std::int64_t>(total_size());
  if (!seen.empty() && (*seen.begin() != 0 || *seen.rbegin() != n - 1)) {
    fail(ErrorKind::format, "ids must be dense 0.." + std::to_string(n - 1));
  }

  train_index_.clear();
  train_index_.reserve(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    train_index_[train[i].id] = i;
  }
  digest = compute_dataset_digest(*this);
}

namespace {

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

void append_rows(std::string& out, const std::vector<Instance>& instances, const char* tag) {
  for (const Instance& inst : instances) {
    out += std::to_string(inst.id);
    out += ',';
    out += tag;
    out += ',';
    out += std::to_string(inst.label);
    for (double v : inst.features) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  fields.push_back(current);
  return fields;
}

long parse_int_field(const std::string& token, std::size_t line_no, const char* what) {
  long value = 0;
  const auto result = std::from_chars(token.data(), token.data() + token.size(), value);
  if (result.ec != std::errc{} || result.ptr != token.data() + token.size()) {
    fail(ErrorKind::format,
         "line " + std::to_string(line_no) + ": bad " + what + " '" + token + "'");
  }
  return value;
}

}  // namespace

std::string serialize_embedding_csv(const Dataset& dataset) {
  std::string out;
  out.reserve(64 + dataset.total_size() * (16 + 18 * static_cast<std::size_t>(dataset.feature_dim)));
  out += "dim=" + std::to_string(dataset.feature_dim) +
         ",classes=" + std::to_string(dataset.class_count) + "\n";
  append_rows(out, dataset.train, "train");
  append_rows(out, dataset.test, "test");
  return out;
}

std::string compute_dataset_digest(const Dataset& dataset) {
  const std::uint64_t hash = fnv1a64(serialize_embedding_csv(dataset));
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(hash));
  return std::string(buffer);
}

void write_embedding_csv(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot open for writing: " + path);
  const std::string body = serialize_embedding_csv(dataset);
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) fail(ErrorKind::io, "write failed: " + path);
}

Dataset load_embedding_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open: " + path);

  Dataset dataset;
  dataset.name = path;

  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) fail(ErrorKind::format, "line 1: missing header");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  {
    const auto fields = split_csv_line(line);
    if (fields.size() != 2 || fields[0].rfind("dim=", 0) != 0 ||
        fields[1].rfind("classes=", 0) != 0) {
      fail(ErrorKind::format, "line 1: header must be 'dim=<d>,classes=<K>'");
    }
    dataset.feature_dim = static_cast<int>(parse_int_field(fields[0].substr(4), 1, "dim"));
    dataset.class_count = static_cast<int>(parse_int_field(fields[1].substr(8), 1, "classes"));
    if (dataset.feature_dim < 1) fail(ErrorKind::format, "line 1: dim must be >= 1");
    if (dataset.class_count < 1) fail(ErrorKind::format, "line 1: classes must be >= 1");
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      fail(ErrorKind::format, "line " + std::to_string(line_no) + ": empty row");
    }
    const auto fields = split_csv_line(line);
    const std::size_t expected = 3 + static_cast<std::size_t>(dataset.feature_dim);
    if (fields.size() != expected) {
      fail(ErrorKind::format, "line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(expected) + " fields, got " +
                                  std::to_string(fields.size()));
    }
    Instance inst;
    inst.id = parse_int_field(fields[0], line_no, "id");
    if (inst.id < 0) {
      fail(ErrorKind::format, "line " + std::to_string(line_no) + ": negative id");
    }
    inst.label = static_cast<int>(parse_int_field(fields[2], line_no, "label"));
    if (inst.label < 0 || inst.label >= dataset.class_count) {
      fail(ErrorKind::format, "line " + std::to_string(line_no) + ": label " +
                                  fields[2] + " out of range [0," +
                                  std::to_string(dataset.class_count) + ")");
    }
    inst.features.reserve(static_cast<std::size_t>(dataset.feature_dim));
    for (std::size_t j = 3; j < fields.size(); ++j) {
      double v;
      try {
        v = parse_double(fields[j]);
      } catch (const Error&) {
        fail(ErrorKind::format,
             "line " + std::to_string(line_no) + ": bad feature '" + fields[j] + "'");
      }
      if (!std::isfinite(v)) {
        fail(ErrorKind::format, "line " + std::to_string(line_no) + ": non-finite feature");
      }
      inst.features.push_back(v);
    }
    if (fields[1] == "train") {
      dataset.train.push_back(std::move(inst));
    } else if (fields[1] == "test") {
      dataset.test.push_back(std::move(inst));
    } else {
      fail(ErrorKind::format,
           "line " + std::to_string(line_no) + ": unknown split tag '" + fields[1] + "'");
    }
  }

  if (dataset.train.empty() && dataset.test.empty()) {
    fail(ErrorKind::format, "no data rows");
  }
  try {
    dataset.finalize();
  } catch (const Error& e) {
    fail(ErrorKind::format, path + ": " + e.what());
  }
  return dataset;
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.class_count < 2) fail(ErrorKind::invalid_config, "class_count must be >= 2");
  if (spec.feature_dim < 1) fail(ErrorKind::invalid_config, "feature_dim must be >= 1");
  if (spec.per_class < 2) fail(ErrorKind::invalid_config, "per_class must be >= 2");
  if (spec.separation <= 0.0) fail(ErrorKind::invalid_config, "separation must be > 0");
  if (spec.noise_sigma < 0.0) fail(ErrorKind::invalid_config, "noise_sigma must be >= 0");

  Rng rng(mix_seed(spec.rng_seed, seed_tag::data));
  const int k = spec.class_count;
  const int d = spec.feature_dim;
  const double s = spec.separation;

  // Means drawn from N(0, (s/sqrt(2d))^2 I) so typical pairwise distance is
  // near s; rejection enforces the minimum. Per-mean redraw, bounded attempts.
  const double mean_scale = s / std::sqrt(2.0 * d);
  std::vector<std::vector<double>> means;
  means.reserve(static_cast<std::size_t>(k));
  const int max_attempts = 200000;
  int attempts = 0;
  while (static_cast<int>(means.size()) < k) {
    if (++attempts > max_attempts) {
      fail(ErrorKind::generation, "could not place class means at separation " +
                                      format_double(s) + " after " +
                                      std::to_string(max_attempts) + " attempts");
    }
    std::vector<double> candidate(static_cast<std::size_t>(d));
    for (double& v : candidate) v = mean_scale * rng.next_gaussian();
    bool ok = true;
    for (const auto& existing : means) {
      double dist2 = 0.0;
      for (int j = 0; j < d; ++j) {
        const double diff = candidate[j] - existing[j];
        dist2 += diff * diff;
      }
      if (dist2 < s * s) {
        ok = false;
        break;
      }
    }
    if (ok) means.push_back(std::move(candidate));
  }

  Dataset dataset;
  dataset.name = "synthetic";
  dataset.feature_dim = d;
  dataset.class_count = k;

  // 80/20 per-class split keeps the test set balanced.
  const int test_per_class = spec.per_class / 5;
  const int train_per_class = spec.per_class - test_per_class;

  for (int c = 0; c < k; ++c) {
    std::vector<Instance> members;
    members.reserve(static_cast<std::size_t>(spec.per_class));
    for (int i = 0; i < spec.per_class; ++i) {
      Instance inst;
      inst.label = c;
      inst.features.resize(static_cast<std::size_t>(d));
      for (int j = 0; j < d; ++j) {
        inst.features[static_cast<std::size_t>(j)] =
            means[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] +
            spec.noise_sigma * rng.next_gaussian();
      }
      members.push_back(std::move(inst));
    }
    shuffle(members, rng);
    for (int i = 0; i < spec.per_class; ++i) {
      if (i < train_per_class) {
        dataset.train.push_back(std::move(members[static_cast<std::size_t>(i)]));
      } else {
        dataset.test.push_back(std::move(members[static_cast<std::size_t>(i)]));
      }
    }
  }

  // Ids are dense in storage order: train block then test block.
  std::int64_t id = 0;
  for (Instance& inst : dataset.train) inst.id = id++;
  for (Instance& inst : dataset.test) inst.id = id++;

  dataset.finalize();
  return dataset;
}

}  // namespace albudget
