#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "vigil/csv.hpp"
#include "vigil/dsp.hpp"
#include "vigil/errors.hpp"

namespace vigil {

inline constexpr int kEegChannelCount = 17;

// Temporal-parietal-occipital montage used throughout, in fixed order.
inline const std::vector<std::string>& standard_eeg_channels() {
  static const std::vector<std::string> names = {
      "FT7", "FT8", "T7",  "T8",  "TP7", "TP8", "CP1", "CP2", "P1",
      "PZ",  "P2",  "PO3", "POZ", "PO4", "O1",  "OZ",  "O2"};
  return names;
}

inline const std::string& standard_eog_channel() {
  static const std::string name = "VEOG";
  return name;
}

// One continuous driving session: raw EEG and vertical EOG in microvolts plus
// the PERCLOS label stream, one value per 8 s epoch.
struct Recording {
  std::string subject_id;
  std::string experiment_id;
  int sample_rate_hz = kRawRateHz;
  std::vector<std::string> eeg_channels;
  std::string eog_channel;
  Eigen::MatrixXd eeg;          // n_samples x 17
  Eigen::VectorXd eog;          // n_samples
  Eigen::VectorXd perclos;      // n_epochs

  Eigen::Index n_samples() const { return eeg.rows(); }
  Eigen::Index n_epochs() const { return perclos.size(); }
  std::string key() const { return subject_id + "/" + experiment_id; }

  void validate() const {
    if (subject_id.empty() || experiment_id.empty())
      throw ValidationError("subject_id and experiment_id must be non-empty");
    if (sample_rate_hz <= 0) throw ValidationError("sample rate must be positive");
    if (static_cast<int>(eeg_channels.size()) != kEegChannelCount)
      throw ValidationError("expected exactly 17 EEG channels, got " +
                            std::to_string(eeg_channels.size()));
    std::unordered_set<std::string> seen;
    for (const auto& name : eeg_channels)
      if (name.empty() || !seen.insert(name).second)
        throw ValidationError("EEG channel names must be non-empty and unique");
    if (eog_channel.empty() || seen.contains(eog_channel))
      throw ValidationError("EOG channel name must be non-empty and distinct from EEG channels");
    if (eeg.cols() != kEegChannelCount)
      throw ValidationError("EEG matrix must have 17 columns");
    if (eeg.rows() != eog.size())
      throw AlignmentError("EEG and EOG sample counts differ");
    if (!eeg.allFinite() || !eog.allFinite())
      throw ValidationError("EEG/EOG samples must be finite");
    const Eigen::Index expected_epochs =
        eeg.rows() / (static_cast<Eigen::Index>(kEpochSeconds) * sample_rate_hz);
    if (perclos.size() != expected_epochs)
      throw AlignmentError("label count " + std::to_string(perclos.size()) +
                           " does not match floor(n_samples / (8 * rate)) = " +
                           std::to_string(expected_epochs));
    for (Eigen::Index i = 0; i < perclos.size(); ++i)
      if (!(perclos[i] >= 0.0 && perclos[i] <= 1.0))
        throw ValidationError("PERCLOS values must lie in [0, 1]");
  }
};

namespace detail {

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("missing or unreadable " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

// Reads a CSV whose header must match `expected_header` exactly; returns the
// numeric rows in file order.
inline std::vector<std::vector<double>> read_numeric_csv(
    const std::filesystem::path& path, const std::vector<std::string>& expected_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("missing or unreadable " + path.string());
  std::string line;
  if (!read_csv_line(in, line)) throw FormatError(path.string() + " is empty");
  const auto header = split_csv_line(line);
  if (header != expected_header) {
    std::string want;
    for (std::size_t i = 0; i < expected_header.size(); ++i)
      want += (i ? "," : "") + expected_header[i];
    throw FormatError(path.string() + ": header mismatch (expected '" + want + "', got '" +
                      line + "')");
  }
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (read_csv_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != expected_header.size())
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(expected_header.size()) + " fields, got " +
                        std::to_string(fields.size()));
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields)
      row.push_back(parse_double(f, path.string() + ":" + std::to_string(line_no)));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

// A recording directory holds manifest.json, eeg.csv, eog.csv, labels.csv.
inline Recording load_recording(const std::filesystem::path& dir) {
  const auto manifest = detail::read_json_file(dir / "manifest.json");
  Recording rec;
  try {
    rec.subject_id = manifest.at("subject_id").get<std::string>();
    rec.experiment_id = manifest.at("experiment_id").get<std::string>();
    rec.sample_rate_hz = manifest.at("sample_rate_hz").get<int>();
    rec.eeg_channels = manifest.at("eeg_channels").get<std::vector<std::string>>();
    rec.eog_channel = manifest.at("eog_channel").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError((dir / "manifest.json").string() + ": " + e.what());
  }

  const auto eeg_rows = detail::read_numeric_csv(dir / "eeg.csv", rec.eeg_channels);
  rec.eeg.resize(static_cast<Eigen::Index>(eeg_rows.size()),
                 static_cast<Eigen::Index>(rec.eeg_channels.size()));
  for (std::size_t r = 0; r < eeg_rows.size(); ++r)
    for (std::size_t c = 0; c < eeg_rows[r].size(); ++c)
      rec.eeg(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = eeg_rows[r][c];

  const auto eog_rows = detail::read_numeric_csv(dir / "eog.csv", {rec.eog_channel});
  rec.eog.resize(static_cast<Eigen::Index>(eog_rows.size()));
  for (std::size_t r = 0; r < eog_rows.size(); ++r) rec.eog[static_cast<Eigen::Index>(r)] = eog_rows[r][0];

  const auto label_rows = detail::read_numeric_csv(dir / "labels.csv", {"epoch_index", "perclos"});
  rec.perclos.resize(static_cast<Eigen::Index>(label_rows.size()));
  for (std::size_t r = 0; r < label_rows.size(); ++r) {
    if (label_rows[r][0] != static_cast<double>(r))
      throw FormatError((dir / "labels.csv").string() + ": epoch_index must run 0..n-1 in order");
    rec.perclos[static_cast<Eigen::Index>(r)] = label_rows[r][1];
  }

  rec.validate();
  return rec;
}

// Reads only (subject_id, experiment_id) from a recording's manifest, so a
// corpus can be ordered canonically without loading any signal data.
inline std::pair<std::string, std::string> read_recording_ids(const std::filesystem::path& dir) {
  const auto manifest = detail::read_json_file(dir / "manifest.json");
  try {
    return {manifest.at("subject_id").get<std::string>(),
            manifest.at("experiment_id").get<std::string>()};
  } catch (const nlohmann::json::exception& e) {
    throw FormatError((dir / "manifest.json").string() + ": " + e.what());
  }
}

inline void write_recording(const Recording& rec, const std::filesystem::path& dir) {
  rec.validate();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  check_plain_field(rec.subject_id, "subject_id");
  check_plain_field(rec.experiment_id, "experiment_id");
  for (const auto& name : rec.eeg_channels) check_plain_field(name, "channel name");
  check_plain_field(rec.eog_channel, "channel name");

  nlohmann::json manifest{{"subject_id", rec.subject_id},
                          {"experiment_id", rec.experiment_id},
                          {"sample_rate_hz", rec.sample_rate_hz},
                          {"eeg_channels", rec.eeg_channels},
                          {"eog_channel", rec.eog_channel}};
  {
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
    out << manifest.dump(2) << '\n';
    if (!out) throw IoError("write failed on " + (dir / "manifest.json").string());
  }

  {
    CsvWriter eeg_out((dir / "eeg.csv").string());
    eeg_out.write_row(rec.eeg_channels);
    std::vector<std::string> fields(rec.eeg_channels.size());
    for (Eigen::Index r = 0; r < rec.eeg.rows(); ++r) {
      for (Eigen::Index c = 0; c < rec.eeg.cols(); ++c)
        fields[static_cast<std::size_t>(c)] = format_double(rec.eeg(r, c));
      eeg_out.write_row(fields);
    }
    eeg_out.close();
  }
  {
    CsvWriter eog_out((dir / "eog.csv").string());
    eog_out.write_row({rec.eog_channel});
    for (Eigen::Index r = 0; r < rec.eog.size(); ++r)
      eog_out.write_row({format_double(rec.eog[r])});
    eog_out.close();
  }
  {
    CsvWriter label_out((dir / "labels.csv").string());
    label_out.write_row({"epoch_index", "perclos"});
    for (Eigen::Index e = 0; e < rec.perclos.size(); ++e)
      label_out.write_row({std::to_string(e), format_double(rec.perclos[e])});
    label_out.close();
  }
}

// True if `dir` itself is a recording directory (as opposed to a corpus root
// whose subdirectories are recordings).
inline bool is_recording_dir(const std::filesystem::path& dir) {
  return std::filesystem::exists(dir / "manifest.json");
}

// Recording directories under a corpus root (or the root itself if it is one),
// sorted by path so callers can load them one at a time in a stable order.
inline std::vector<std::filesystem::path> list_recording_dirs(const std::filesystem::path& root) {
  if (is_recording_dir(root)) return {root};
  if (!std::filesystem::is_directory(root)) throw IoError("no such directory: " + root.string());
  std::vector<std::filesystem::path> dirs;
  for (const auto& entry : std::filesystem::directory_iterator(root))
    if (entry.is_directory() && is_recording_dir(entry.path())) dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty())
    throw FormatError("no recording directories (manifest.json) found under " + root.string());
  return dirs;
}

// Loads either a single recording directory or every recording under a corpus
// root, sorted by (subject_id, experiment_id) for a canonical order.
inline std::vector<Recording> load_corpus(const std::filesystem::path& root) {
  std::vector<Recording> recordings;
  for (const auto& dir : list_recording_dirs(root)) recordings.push_back(load_recording(dir));
  std::sort(recordings.begin(), recordings.end(), [](const Recording& a, const Recording& b) {
    return std::tie(a.subject_id, a.experiment_id) < std::tie(b.subject_id, b.experiment_id);
  });
  return recordings;
}

}  // namespace vigil
