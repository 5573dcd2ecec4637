#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "vigil/recording.hpp"
#include "vigil/synth.hpp"

using namespace vigil;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

Recording small_recording(const std::string& subject, const std::string& experiment,
                          std::uint64_t seed) {
  SynthSpec spec;
  spec.subject_id = subject;
  spec.experiment_id = experiment;
  spec.n_epochs = 4;
  spec.seed = seed;
  return synth_recording(spec);
}

}  // namespace

TEST_CASE("recording round-trips through its directory format", "[recording]") {
  const auto dir = fresh_dir("vigil_rec_roundtrip");
  const Recording original = small_recording("s01", "e1", 3);
  write_recording(original, dir / "s01_e1");

  const Recording loaded = load_recording(dir / "s01_e1");
  REQUIRE(loaded.subject_id == original.subject_id);
  REQUIRE(loaded.experiment_id == original.experiment_id);
  REQUIRE(loaded.sample_rate_hz == original.sample_rate_hz);
  REQUIRE(loaded.eeg_channels == original.eeg_channels);
  REQUIRE(loaded.eog_channel == original.eog_channel);
  REQUIRE(loaded.eeg.rows() == original.eeg.rows());
  // format_double writes shortest-round-trip representations, so equality is exact.
  REQUIRE((loaded.eeg - original.eeg).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((loaded.eog - original.eog).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((loaded.perclos - original.perclos).cwiseAbs().maxCoeff() == 0.0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("standard montage has 17 distinct channels", "[recording]") {
  const auto& channels = standard_eeg_channels();
  REQUIRE(channels.size() == kEegChannelCount);
  for (std::size_t i = 0; i < channels.size(); ++i)
    for (std::size_t j = i + 1; j < channels.size(); ++j)
      REQUIRE(channels[i] != channels[j]);
  REQUIRE(std::string(standard_eog_channel()) == "VEOG");
}

TEST_CASE("validation rejects inconsistent recordings", "[recording]") {
  Recording rec = small_recording("s01", "e1", 4);

  SECTION("empty subject id") {
    rec.subject_id = "";
    REQUIRE_THROWS_AS(rec.validate(), ValidationError);
  }
  SECTION("eog length mismatch") {
    rec.eog.conservativeResize(rec.eog.size() - 1);
    REQUIRE_THROWS_AS(rec.validate(), AlignmentError);
  }
  SECTION("perclos count mismatch") {
    rec.perclos.conservativeResize(rec.perclos.size() - 1);
    REQUIRE_THROWS_AS(rec.validate(), AlignmentError);
  }
  SECTION("perclos out of range") {
    rec.perclos[0] = 1.25;
    REQUIRE_THROWS_AS(rec.validate(), ValidationError);
  }
  SECTION("non-finite sample") {
    rec.eeg(0, 0) = std::numeric_limits<double>::infinity();
    REQUIRE_THROWS_AS(rec.validate(), ValidationError);
  }
  SECTION("duplicate channel name") {
    rec.eeg_channels[1] = rec.eeg_channels[0];
    REQUIRE_THROWS_AS(rec.validate(), ValidationError);
  }
}

TEST_CASE("loading rejects tampered files", "[recording]") {
  const auto dir = fresh_dir("vigil_rec_tamper");
  write_recording(small_recording("s01", "e1", 5), dir / "rec");

  SECTION("header mismatch") {
    // Replace the first header field of eeg.csv with a wrong channel name.
    const auto path = dir / "rec" / "eeg.csv";
    std::ifstream in(path);
    std::string contents((std::istreambuf_iterator<char>(in)), {});
    in.close();
    contents.replace(0, 3, "ZZZ");
    std::ofstream out(path, std::ios::trunc);
    out << contents;
    out.close();
    REQUIRE_THROWS_AS(load_recording(dir / "rec"), FormatError);
  }
  SECTION("missing eog file") {
    std::filesystem::remove(dir / "rec" / "eog.csv");
    REQUIRE_THROWS_AS(load_recording(dir / "rec"), IoError);
  }
  SECTION("labels out of order") {
    const auto path = dir / "rec" / "labels.csv";
    std::ofstream out(path, std::ios::trunc);
    out << "epoch_index,perclos\n1,0.5\n0,0.5\n2,0.5\n3,0.5\n";
    out.close();
    REQUIRE_THROWS_AS(load_recording(dir / "rec"), FormatError);
  }
  SECTION("non-numeric field names file and line") {
    const auto path = dir / "rec" / "labels.csv";
    std::ofstream out(path, std::ios::trunc);
    out << "epoch_index,perclos\n0,oops\n";
    out.close();
    REQUIRE_THROWS_WITH(load_recording(dir / "rec"),
                        Catch::Matchers::ContainsSubstring("labels.csv:2"));
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("corpus loading sorts by subject then experiment", "[recording]") {
  const auto dir = fresh_dir("vigil_rec_corpus");
  // Directory names deliberately sort against the id order.
  write_recording(small_recording("s02", "e1", 6), dir / "zz");
  write_recording(small_recording("s01", "e2", 7), dir / "mm");
  write_recording(small_recording("s01", "e1", 8), dir / "aa");

  const auto corpus = load_corpus(dir);
  REQUIRE(corpus.size() == 3);
  REQUIRE(corpus[0].subject_id == "s01");
  REQUIRE(corpus[0].experiment_id == "e1");
  REQUIRE(corpus[1].subject_id == "s01");
  REQUIRE(corpus[1].experiment_id == "e2");
  REQUIRE(corpus[2].subject_id == "s02");

  REQUIRE(list_recording_dirs(dir).size() == 3);
  REQUIRE(is_recording_dir(dir / "aa"));
  REQUIRE_FALSE(is_recording_dir(dir));
  REQUIRE(read_recording_ids(dir / "zz") == std::pair<std::string, std::string>{"s02", "e1"});

  // A single recording directory is also a valid corpus root.
  REQUIRE(load_corpus(dir / "aa").size() == 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("empty corpus root is an error", "[recording]") {
  const auto dir = fresh_dir("vigil_rec_empty");
  REQUIRE_THROWS_AS(load_corpus(dir), FormatError);
  REQUIRE_THROWS_AS(load_corpus(dir / "missing"), IoError);
  std::filesystem::remove_all(dir);
}
