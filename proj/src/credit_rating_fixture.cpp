#include "mcsort/credit_rating.hpp"

#include <string>

namespace mcsort::credit_rating {

DecisionMatrix matrix() {
  static const double g1[] = {3.8,  5.84, 0.04,  4.89, 0.57,  16.7, 3.16, 25.42, 17.99, 3.98,
                              0.76, 24.16, 2.53, 35.06, 0.72, 24,   8.86, 10.58, 16.35, 1.7};
  static const double g2[] = {2.4,  1.96, 1.14, 2.92, 1.72, 2.32, 4.1,   3.35, 1.34, 3.26,
                              2.74, 2.83, 2.54, 9.56, 0.97, 2.5,  29.06, 4.03, 3.6,  5.92};
  static const double g3[] = {60.7,  63.7,  64.26, 55.04, 64.7,  53.29, 23.9,
                              59.03, 73.84, 84.95, 84.44, 70.51, 81.05, 61.08,
                              99.67, 99.92, 47.4,  89.64, 56.55, 85.83};
  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 20; ++i) {
    ids.push_back("a" + std::to_string(i + 1));
    rows.push_back({g1[i], g2[i], g3[i]});
  }
  return DecisionMatrix(std::move(ids), {"g1", "g2", "g3"}, std::move(rows));
}

std::vector<int> labels() { return {2, 4, 2, 3, 1, 4, 1, 4, 2, 3, 4, 3, 1, 4, 3, 4, 4, 2, 3, 1}; }

std::vector<AssignmentExample> initial_examples() {
  return {{"a3", 2}, {"a12", 3}, {"a16", 4}, {"a20", 1}};
}

std::vector<AssignmentExample> answers() {
  return {{"a17", 4}, {"a14", 4}, {"a9", 2}, {"a7", 1},
          {"a18", 2}, {"a19", 3}, {"a2", 4}, {"a15", 3}};
}

std::vector<ObjectiveRow> published_first_round() {
  return {
      {"a1", {.0433, .0671, .0509, .0299}},  {"a2", {.0423, .0675, .0613, .0354}},
      {"a4", {.0553, .0684, .0596, .0357}},  {"a5", {.0124, .0658, .0089, .0048}},
      {"a6", {.0482, .0592, .0684, .0589}},  {"a7", {.0684, .0684, .0614, .0439}},
      {"a8", {.0254, .0381, .0684, .0518}},  {"a9", {.0455, .0548, .0672, .0499}},
      {"a10", {.0616, .0605, .0316, .0213}}, {"a11", {.0611, .0470, .0270, .0189}},
      {"a13", {.0663, .0460, .0276, .0197}}, {"a14", {.0684, .0684, .0669, .0573}},
      {"a15", {.0190, .0509, .0675, .0488}}, {"a17", {.0684, .0684, .0682, .0645}},
      {"a18", {.0500, .0679, .0626, .0427}}, {"a19", {.0515, .0612, .0684, .0523}},
  };
}

std::vector<ObjectiveRow> published_second_round() {
  return {
      {"a1", {.00310, .0561, .0509, .0299}}, {"a2", {.0379, .0558, .0613, .0354}},
      {"a4", {.0262, .0526, .0596, .0357}},  {"a5", {.0117, .0631, .0089, .0048}},
      {"a6", {.0398, .0496, .0579, .0589}},  {"a7", {.0639, .0645, .0614, .0439}},
      {"a8", {.0222, .0313, .0616, .0518}},  {"a9", {.0455, .0548, .0638, .0490}},
      {"a10", {.0555, .0605, .0316, .0213}}, {"a11", {.0598, .0425, .0244, .0171}},
      {"a13", {.0619, .0460, .0276, .0197}}, {"a14", {.0645, .0645, .0640, .0569}},
      {"a15", {.0189, .0508, .0637, .0470}}, {"a18", {.0449, .0597, .0623, .0427}},
      {"a19", {.0391, .0518, .0613, .0523}},
  };
}

std::vector<InformationRow> published_first_round_information() {
  return {{"a1", 1.386204},  {"a2", 1.386208},  {"a4", 1.386223},  {"a5", 1.385979},
          {"a6", 1.386269},  {"a7", 1.386245},  {"a8", 1.386166},  {"a9", 1.386261},
          {"a10", 1.386138}, {"a11", 1.386156}, {"a13", 1.386132}, {"a14", 1.386284},
          {"a15", 1.386142}, {"a17", 1.386293}, {"a18", 1.386244}, {"a19", 1.386270}};
}

std::vector<InformationRow> published_second_round_information() {
  return {{"a1", 1.386226},  {"a2", 1.386232},  {"a4", 1.386207},  {"a5", 1.386006},
          {"a6", 1.386265},  {"a7", 1.386259},  {"a8", 1.386171},  {"a9", 1.386270},
          {"a10", 1.386162}, {"a11", 1.386157}, {"a13", 1.386159}, {"a14", 1.386289},
          {"a15", 1.386161}, {"a18", 1.386256}, {"a19", 1.386263}};
}

std::array<double, 5> published_thresholds() { return {0.0, 0.5238, 0.6456, 0.7255, 1.0799}; }

std::array<double, 5> published_monotone_thresholds() {
  return {0.0, 0.1603, 0.3206, 0.4809, 1.1603};
}

}  // namespace mcsort::credit_rating
