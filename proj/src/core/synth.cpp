#include "synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "error.hpp"
#include "segcount.hpp"

namespace nosense {

namespace {

using Rng = std::mt19937_64;

std::vector<double> gaussian(Rng& rng, std::uint32_t dim) {
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<double> v(dim);
  for (double& x : v) x = n01(rng);
  return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void scale_to_unit(std::vector<double>& v) {
  const double n = std::sqrt(dot(v, v));
  for (double& x : v) x /= n;
}

// Orthonormal vectors from seeded Gaussian draws, modified Gram-Schmidt.
std::vector<std::vector<double>> orthonormal(Rng& rng, std::size_t count, std::uint32_t dim) {
  std::vector<std::vector<double>> basis;
  while (basis.size() < count) {
    auto v = gaussian(rng, dim);
    for (const auto& b : basis) {
      const double p = dot(v, b);
      for (std::size_t i = 0; i < dim; ++i) v[i] -= p * b[i];
    }
    if (std::sqrt(dot(v, v)) < 1e-6) continue;
    scale_to_unit(v);
    basis.push_back(std::move(v));
  }
  return basis;
}

std::vector<float> to_float(const std::vector<double>& v) { return {v.begin(), v.end()}; }

void add_noise(std::vector<double>& v, Rng& rng, double noise) {
  if (noise <= 0.0) return;
  const auto g = gaussian(rng, static_cast<std::uint32_t>(v.size()));
  const double scale = noise / std::sqrt(static_cast<double>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += scale * g[i];
}

const std::array<const char*, 8> kObjects{"teddy bear", "toy car", "red mug", "rubber duck",
                                           "basketball", "alarm clock", "backpack", "umbrella"};
const std::array<const char*, 10> kAuxiliaries{"bed", "bathtub", "sink", "floor", "sofa",
                                                "desk", "stove", "shelf", "window", "carpet"};
const std::array<const char*, 4> kOtherCategories{"table", "lamp", "plant", "monitor"};

}  // namespace

void VsrSynthParams::validate() const {
  if (frames < 4) fail(ErrorCode::kInfeasibleParams, "VSR needs at least 4 frames");
  if (dim < 6) fail(ErrorCode::kInfeasibleParams, "VSR needs dim >= 6");
  if (!(margin >= 0.0) || margin >= 1.0) fail(ErrorCode::kInfeasibleParams, "margin must be in [0,1)");
  if (!(noise >= 0.0)) fail(ErrorCode::kInfeasibleParams, "noise must be >= 0");
  if (!needle_positions.empty()) {
    if (needle_positions.size() != 4) fail(ErrorCode::kInfeasibleParams, "exactly 4 needle positions required");
    for (std::size_t i = 0; i < 4; ++i) {
      if (needle_positions[i] < 1 || needle_positions[i] > frames) {
        fail(ErrorCode::kInfeasibleParams, "needle position outside 1..N");
      }
      if (i > 0 && needle_positions[i] <= needle_positions[i - 1]) {
        fail(ErrorCode::kInfeasibleParams, "needle positions must be strictly increasing");
      }
    }
  }
  if (sigma && !is_permutation_of_four(*sigma)) fail(ErrorCode::kInfeasibleParams, "sigma is not a permutation");
  if (adversarial_duplicate && frames < 5) fail(ErrorCode::kInfeasibleParams, "no distractor slot to duplicate into");
}

VsrInstance gen_vsr_instance(const VsrSynthParams& p) {
  p.validate();
  Rng rng(p.seed);
  VsrInstance inst;

  // Needle placement and order.
  if (p.needle_positions.empty()) {
    std::vector<std::int64_t> all(static_cast<std::size_t>(p.frames));
    std::iota(all.begin(), all.end(), 1);
    std::shuffle(all.begin(), all.end(), rng);
    std::sort(all.begin(), all.begin() + 4);
    std::copy_n(all.begin(), 4, inst.needles.begin());
  } else {
    std::copy_n(p.needle_positions.begin(), 4, inst.needles.begin());
  }
  if (p.sigma) {
    inst.sigma = *p.sigma;
  } else {
    inst.sigma = {1, 2, 3, 4};
    std::shuffle(inst.sigma.begin(), inst.sigma.end(), rng);
  }

  const auto basis = orthonormal(rng, 5, p.dim);  // O, A_1..A_4
  const auto& object = basis[0];
  const double c = p.margin + (1.0 - p.margin) / 2.0;
  const double b = std::sqrt(1.0 - c * c);

  inst.frames_raw.dim = p.dim;
  std::int64_t duplicate_slot = 0;
  std::vector<double> first_needle;
  for (std::int64_t t = 1; t <= p.frames; ++t) {
    const auto needle = std::find(inst.needles.begin(), inst.needles.end(), t);
    std::vector<double> v;
    if (needle != inst.needles.end()) {
      const auto u = static_cast<std::size_t>(needle - inst.needles.begin());
      const auto& aux = basis[static_cast<std::size_t>(inst.sigma[u])];
      v.resize(p.dim);
      for (std::uint32_t i = 0; i < p.dim; ++i) v[i] = c * object[i] + b * aux[i];
      add_noise(v, rng, p.noise);
      if (u == 0) first_needle = v;
    } else {
      v = gaussian(rng, p.dim);
      const double proj = dot(v, object);
      for (std::uint32_t i = 0; i < p.dim; ++i) v[i] -= proj * object[i];
      scale_to_unit(v);
      add_noise(v, rng, p.noise);
      if (p.adversarial_duplicate && duplicate_slot == 0) duplicate_slot = t;
    }
    inst.frames_raw.append(to_float(v));
  }
  if (p.adversarial_duplicate) {
    const auto src = inst.frames_raw.row(static_cast<std::uint64_t>(inst.needles[0] - 1));
    std::vector<float> copy(src.begin(), src.end());
    std::copy(copy.begin(), copy.end(),
              inst.frames_raw.data.begin() + static_cast<std::ptrdiff_t>((duplicate_slot - 1) * p.dim));
  }

  inst.text_raw.dim = p.dim;
  for (const auto& v : basis) inst.text_raw.append(to_float(v));

  // Everything below sees exactly what a reader of the written files sees.
  std::vector<Embedding> rows;
  rows.reserve(static_cast<std::size_t>(p.frames));
  for (std::uint64_t t = 0; t < inst.frames_raw.count(); ++t) rows.push_back(normalize(inst.frames_raw.row(t)));
  inst.stream = make_stream("vsr-" + std::to_string(p.seed), std::move(rows));
  inst.queries.object = normalize(inst.text_raw.row(0));
  for (std::size_t i = 0; i < 4; ++i) inst.queries.aux[i] = normalize(inst.text_raw.row(i + 1));

  // Guarantee (i): needles are strictly the top 4 with gap >= margin.
  double needle_min = 2.0;
  double distractor_max = -2.0;
  for (const auto& f : inst.stream.frames) {
    const double s = cosine(f.embedding, inst.queries.object);
    if (std::find(inst.needles.begin(), inst.needles.end(), f.index) != inst.needles.end()) {
      needle_min = std::min(needle_min, s);
    } else {
      distractor_max = std::max(distractor_max, s);
    }
  }
  if (p.frames > 4) {
    const double gap = needle_min - distractor_max;
    if (!(gap > 0.0) || gap < p.margin) {
      fail(ErrorCode::kInfeasibleParams, "needle/distractor similarity gap " + std::to_string(gap) +
                                             " does not meet margin " + std::to_string(p.margin));
    }
  }

  // Question: gold is sigma, plus three other distinct permutations.
  auto& q = inst.question;
  q.question_id = "q1";
  q.object_text = kObjects[rng() % kObjects.size()];
  std::vector<std::size_t> aux_pick(kAuxiliaries.size());
  std::iota(aux_pick.begin(), aux_pick.end(), 0);
  std::shuffle(aux_pick.begin(), aux_pick.end(), rng);
  for (std::size_t i = 0; i < 4; ++i) q.auxiliaries[i] = kAuxiliaries[aux_pick[i]];
  q.raw_question = "In which order does the " + q.object_text + " appear next to the " + q.auxiliaries[0] + ", " +
                   q.auxiliaries[1] + ", " + q.auxiliaries[2] + " and " + q.auxiliaries[3] + "?";

  std::vector<Permutation> others;
  Permutation perm{1, 2, 3, 4};
  do {
    if (perm != inst.sigma) others.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  std::shuffle(others.begin(), others.end(), rng);
  const int gold_slot = static_cast<int>(rng() % 4);
  for (int k = 0, o = 0; k < 4; ++k) q.options[k] = (k == gold_slot) ? inst.sigma : others[o++];
  q.gold_option = gold_slot + 1;
  q.validate();

  // Guarantee (ii): gold strictly beats every other option on the needles,
  // computed directly rather than through the engine.
  std::array<double, 4> scores{};
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t u = 0; u < 4; ++u) {
      const auto& f = inst.stream.frames[static_cast<std::size_t>(inst.needles[u] - 1)];
      scores[k] += cosine(f.embedding, inst.queries.aux[static_cast<std::size_t>(q.options[k][u] - 1)]);
    }
  }
  for (int k = 0; k < 4; ++k) {
    if (k != gold_slot && !(scores[gold_slot] > scores[k])) {
      fail(ErrorCode::kInfeasibleParams, "gold option does not strictly maximize the score");
    }
  }
  return inst;
}

std::vector<std::pair<std::string, std::vector<float>>> templated_text_table(const VsrInstance& inst,
                                                                             const PromptTemplates& templates,
                                                                             std::uint64_t seed) {
  Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
  const auto o = inst.queries.object.values();
  std::vector<double> object(o.begin(), o.end());
  std::vector<std::pair<std::string, std::vector<float>>> out;
  auto perturbed = [&](double noise) {
    auto v = object;
    add_noise(v, rng, noise);
    return to_float(v);
  };
  auto contains = [&](const std::string& s) {
    return std::any_of(out.begin(), out.end(), [&](const auto& e) { return e.first == s; });
  };
  const auto& q = inst.question;
  for (const auto& t : templates.ensemble) {
    auto text = expand_template(t, q.object_text);
    if (!contains(text)) out.emplace_back(std::move(text), perturbed(0.2));
  }
  if (auto basic = expand_template(templates.basic, q.object_text); !contains(basic)) {
    out.emplace_back(std::move(basic), perturbed(0.2));
  }
  if (q.raw_question) out.emplace_back(*q.raw_question, perturbed(0.5));
  for (std::size_t i = 0; i < 4; ++i) {
    const auto a = inst.text_raw.row(i + 1);
    out.emplace_back(expand_template(templates.joint, q.object_text, q.auxiliaries[i]),
                     std::vector<float>(a.begin(), a.end()));
  }
  return out;
}

void VscSynthParams::validate() const {
  if (rooms < 1) fail(ErrorCode::kInfeasibleParams, "need at least one room");
  if (dwell_frames < 1) fail(ErrorCode::kInfeasibleParams, "dwell must be >= 1");
  if (dim < static_cast<std::uint32_t>(rooms)) {
    fail(ErrorCode::kInfeasibleParams, "dim " + std::to_string(dim) + " cannot hold " + std::to_string(rooms) +
                                           " orthogonal rooms");
  }
  if (!targets_per_room.empty() && targets_per_room.size() != static_cast<std::size_t>(rooms)) {
    fail(ErrorCode::kInfeasibleParams, "targets_per_room must list every room");
  }
  for (int n : targets_per_room) {
    if (n < 0) fail(ErrorCode::kInfeasibleParams, "negative object count");
  }
  if (others_per_room < 0) fail(ErrorCode::kInfeasibleParams, "negative object count");
  if (!(noise >= 0.0)) fail(ErrorCode::kInfeasibleParams, "noise must be >= 0");
  if (target_category.empty()) fail(ErrorCode::kInfeasibleParams, "target category is empty");
}

VscInstance gen_vsc_scene(const VscSynthParams& p) {
  p.validate();
  Rng rng(p.seed);
  VscInstance inst;
  inst.scene.target_category = p.target_category;

  std::uniform_int_distribution<int> count_draw(1, 4);
  for (int r = 0; r < p.rooms; ++r) {
    Room room;
    room.room_id = "room" + std::to_string(r);
    room.dwell_frames = p.dwell_frames;
    const int targets = p.targets_per_room.empty() ? count_draw(rng) : p.targets_per_room[static_cast<std::size_t>(r)];
    for (int i = 0; i < targets; ++i) {
      room.objects.push_back({room.room_id + "/" + p.target_category + std::to_string(i), p.target_category});
    }
    for (int i = 0; i < p.others_per_room; ++i) {
      const std::string cat = kOtherCategories[static_cast<std::size_t>(i) % kOtherCategories.size()];
      room.objects.push_back({room.room_id + "/" + cat + std::to_string(i), cat});
    }
    inst.scene.rooms.push_back(std::move(room));
  }
  inst.scene.validate();

  const auto centers = orthonormal(rng, static_cast<std::size_t>(p.rooms), p.dim);
  inst.frames_raw.dim = p.dim;
  std::vector<FrameAnnotation> annotations;
  for (std::size_t r = 0; r < inst.scene.rooms.size(); ++r) {
    const auto& room = inst.scene.rooms[r];
    const std::int64_t n = static_cast<std::int64_t>(room.objects.size());
    const std::int64_t m = std::min(n, room.dwell_frames);
    for (std::int64_t j = 0; j < room.dwell_frames; ++j) {
      auto v = centers[r];
      add_noise(v, rng, p.noise);
      inst.frames_raw.append(to_float(v));
      FrameAnnotation a;
      a.room_id = room.room_id;
      for (std::int64_t i = 0; i < n && m > 0; ++i) {
        if (i % m == j % m) a.visible.push_back(room.objects[static_cast<std::size_t>(i)]);
      }
      annotations.push_back(std::move(a));
    }
  }

  std::vector<Embedding> rows;
  for (std::uint64_t t = 0; t < inst.frames_raw.count(); ++t) rows.push_back(normalize(inst.frames_raw.row(t)));
  inst.stream = make_stream("vsc-" + std::to_string(p.seed), std::move(rows));
  for (std::size_t i = 0; i < annotations.size(); ++i) inst.stream.frames[i].annotation = std::move(annotations[i]);
  inst.gold = unique_count_oracle(inst.scene);
  return inst;
}

}  // namespace nosense
