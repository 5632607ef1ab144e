#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "dialogsweep/corpus.hpp"
#include "dialogsweep/tradeoff.hpp"

namespace testsupport {

namespace ds = dialogsweep;

inline std::filesystem::path data_dir() { return DIALOGSWEEP_DATA_DIR; }

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("dialogsweep-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ds::CodeVector random_vector(std::mt19937_64& rng, bool at_least_one) {
  std::bernoulli_distribution coin(0.3);
  std::uniform_int_distribution<int> pick(0, 5);
  ds::CodeVector v;
  for (ds::Code c : ds::kAllCodes) v.set(c, coin(rng));
  if (at_least_one && v.none()) v.set(ds::kAllCodes[pick(rng)]);
  return v;
}

/// Sessions "s0", "s1", ... with the given sizes and random coded gold labels.
inline ds::Corpus synthetic_corpus(const std::vector<int>& sizes, std::uint64_t seed = 1) {
  static const std::array<const char*, 6> texts = {
      "Can you grab the obs machine?", "He is tachy at one twenty.", "Okay.",
      "Should we call the doctor?",    "I am escalating this now.",  "This is Mrs Lee, post op day one."};
  std::mt19937_64 rng(seed);
  std::vector<ds::Session> sessions;
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    ds::Session session{"s" + std::to_string(s), {}};
    double t = 0;
    for (int i = 0; i < sizes[s]; ++i) {
      ds::Utterance u;
      u.session_id = session.id;
      u.utterance_id = i + 1;
      u.t_start = t;
      u.t_end = t + 1.5;
      t += 2.0;
      u.speaker = i % 2 ? ds::Role::PrimaryNurse1 : ds::Role::SecondaryNurse1;
      if (i % 3) u.receiver = i % 2 ? ds::Role::SecondaryNurse1 : ds::Role::PrimaryNurse1;
      u.text = texts[(i + s) % texts.size()];
      u.gold = random_vector(rng, true);
      session.utterances.push_back(std::move(u));
    }
    sessions.push_back(std::move(session));
  }
  return ds::Corpus(std::move(sessions));
}

// Reference per-session processing time (s), macro F1 and GPU energy (J) per
// configuration. Rows are batch sizes 1, 10, ..., 70; columns P1..P4.
inline constexpr std::array<int, 8> kBatches = {1, 10, 20, 30, 40, 50, 60, 70};
inline constexpr double kTime[8][4] = {
    {781.03, 2086.90, 2857.92, 1176.21}, {181.23, 151.20, 198.20, 149.26},
    {125.69, 122.39, 133.96, 131.16},    {117.20, 114.72, 128.14, 125.38},
    {117.46, 136.72, 120.66, 115.35},    {118.66, 113.49, 121.89, 95.01},
    {113.27, 108.03, 115.25, 66.17},     {108.31, 115.35, 109.31, 61.28}};
inline constexpr double kF1[8][4] = {
    {0.61, 0.60, 0.61, 0.63}, {0.56, 0.60, 0.61, 0.60}, {0.51, 0.60, 0.61, 0.59},
    {0.50, 0.58, 0.60, 0.60}, {0.50, 0.49, 0.60, 0.56}, {0.52, 0.40, 0.55, 0.37},
    {0.45, 0.34, 0.46, 0.30}, {0.39, 0.19, 0.37, 0.19}};
inline constexpr double kEnergy[8][4] = {
    {177.46, 474.85, 652.46, 267.85}, {41.40, 34.49, 45.30, 34.07}, {28.71, 27.97, 30.62, 30.00},
    {26.80, 26.23, 29.31, 28.67},     {26.87, 31.28, 27.60, 26.39}, {27.14, 25.95, 27.88, 21.72},
    {25.90, 24.71, 26.37, 15.12},     {24.59, 26.40, 25.00, 14.01}};

inline ds::ConfigId config(int design, int batch) {
  return {ds::PromptDesign(ds::kAllVariants[static_cast<std::size_t>(design)]), batch};
}

/// The 32 reference (f1, time[, energy]) points in (design, batch) order.
inline std::vector<ds::ObjectivePoint> reference_points(bool with_energy) {
  std::vector<ds::ObjectivePoint> pts;
  for (int d = 0; d < 4; ++d) {
    for (int b = 0; b < 8; ++b) {
      pts.push_back(ds::ObjectivePoint::make(
          config(d, kBatches[b]), kF1[b][d], kTime[b][d],
          with_energy ? std::optional<double>(kEnergy[b][d]) : std::nullopt));
    }
  }
  return pts;
}

/// The reference front: P4/b1; P1/b60, b70; P2/b20, b30; P3/b10, b20, b30;
/// P4/b50, b60, b70.
inline std::vector<ds::ConfigId> reference_front() {
  return {config(3, 1),  config(0, 60), config(0, 70), config(1, 20),
          config(1, 30), config(2, 10), config(2, 20), config(2, 30),
          config(3, 50), config(3, 60), config(3, 70)};
}

}  // namespace testsupport
