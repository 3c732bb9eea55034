#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "embedding_io.hpp"
#include "engine.hpp"
#include "types.hpp"

namespace nosense {

struct VsrSynthParams {
  std::int64_t frames = 600;
  std::uint32_t dim = 64;
  double margin = 0.1;                            // needle vs distractor object-similarity gap
  std::vector<std::int64_t> needle_positions;     // empty: drawn from the seed
  std::optional<Permutation> sigma;               // empty: drawn from the seed
  double noise = 0.05;
  std::uint64_t seed = 0;
  bool adversarial_duplicate = false;             // copy a needle into a distractor slot

  void validate() const;  // kInfeasibleParams
};

struct VsrInstance {
  FrameStream stream;
  RecallQuestion question;
  QueryEmbeddings queries;
  std::array<std::int64_t, 4> needles{};
  Permutation sigma{};
  RawMatrix frames_raw;  // what gets written to disk
  RawMatrix text_raw;    // row 0: object query, rows 1..4: auxiliaries
};

// Needles are norm(c*O + b*A_sigma(u) + noise) with c = margin + (1 - margin)/2
// and b = sqrt(1 - c^2); distractors are orthogonal to O before noise.
// The instance is returned only after both guarantees are checked on the
// float32-rounded data: the needles are strictly the top-4 by a gap of at
// least `margin`, and the gold option strictly outscores the others.
VsrInstance gen_vsr_instance(const VsrSynthParams& p);

// Text table where every template expansion exists: ensemble prompts are
// small perturbations of O, the raw question a larger one, joint prompts
// map to A_i. Used to exercise the three query modes end to end.
std::vector<std::pair<std::string, std::vector<float>>> templated_text_table(const VsrInstance& inst,
                                                                             const PromptTemplates& templates,
                                                                             std::uint64_t seed);

struct VscSynthParams {
  int rooms = 2;
  std::vector<int> targets_per_room;  // empty: 1..4 per room from the seed
  int others_per_room = 2;
  std::int64_t dwell_frames = 20;
  std::uint32_t dim = 32;
  double noise = 0.0;
  std::string target_category = "chair";
  std::uint64_t seed = 0;

  void validate() const;  // kInfeasibleParams
};

struct VscInstance {
  CountingScene scene;
  FrameStream stream;  // annotated
  RawMatrix frames_raw;
  std::int64_t gold = 0;
};

// Room centers are exactly orthonormal (Gram-Schmidt on seeded draws).
// Within a room of n objects, frame j shows objects i with
// i mod m == j mod m, m = min(n, dwell), so each dwell sees every object.
VscInstance gen_vsc_scene(const VscSynthParams& p);

}  // namespace nosense
