#pragma once

#include <array>
#include <vector>

namespace ado::detail {

// Level-symmetric LQ_N point-weight data, one entry per even order N <= 20.
//
// Polar cosines follow mu_i^2 = mu_1^2 + (i - 1) * 2 (1 - 3 mu_1^2) / (N - 2).
// Every point of an octant is (mu_i, mu_j, mu_k) with i + j + k = N/2 + 2 and
// its weight depends only on the sorted index triple ("class"). Weights are
// normalized so one octant sums to 1.
//
// mu_1 is the value that makes every even direction-cosine moment up to
// degree N - 2 simultaneously integrable; it agrees with the classical
// tabulated mu_1 to all printed digits. Weights for N = 4, 6, 8, 12, 16 are the
// classical 7-digit tables projected onto the exact pure-moment constraints
// sum_w mu^(2k) = 1/(2k+1), k = 0, 2, ..., N/2. N = 10, 14, 18 solve the full
// degree N - 2 moment system. N = 20 is the positive least-squares fit of that
// system under the exact pure-moment constraints (the exact solution carries
// a negative weight).
struct LevelSymmetricEntry {
  int order;
  double mu1;
  std::vector<double> class_weights;
  std::vector<std::array<int, 3>> classes;
};

inline const std::vector<LevelSymmetricEntry>& level_symmetric_entries() {
  static const std::vector<LevelSymmetricEntry> table = {
      {2, 0.57735026918962576451, {1.0}, {{1, 1, 1}}},
      {4, 0.35002117458154067778, {0.33333333333333333333}, {{1, 1, 2}}},
      {6, 0.26663540151670472033, {0.17612613086338343378, 0.15720720246994989955},
       {{{1, 1, 3}, {1, 2, 2}}}},
      {8, 0.21821789023599238127,
       {0.12098765432098765432, 0.090740740740740740741, 0.092592592592592592593},
       {{{1, 1, 4}, {1, 2, 3}, {2, 2, 2}}}},
      {10, 0.18932132647801047667,
       {0.08930314798435672147, 0.07252915171236552423, 0.045043767436408639049,
        0.053928114487836924355},
       {{{1, 1, 5}, {1, 2, 4}, {1, 3, 3}, {2, 2, 3}}}},
      {12, 0.16721265282271326408,
       {0.070762589970091043977, 0.055881101564888807583, 0.037337673758828582465,
        0.050281901060057118139, 0.025851291655750391122},
       {{{1, 1, 6}, {1, 2, 5}, {1, 3, 4}, {2, 2, 4}, {2, 3, 3}}}},
      {14, 0.1519858614610319124,
       {0.057997040896996996406, 0.048900797636810487458, 0.022793534241187247326,
        0.039413200595007829449, 0.038099086144012171237, 0.025839407641890011961,
        0.0082695799726225282527},
       {{{1, 1, 7}, {1, 2, 6}, {1, 3, 5}, {1, 4, 4}, {2, 2, 5}, {2, 3, 4}, {3, 3, 3}}}},
      {16, 0.13895687506778034459,
       {0.048987239158038533501, 0.041329597869844023241, 0.021232646947779840129,
        0.025620629572935212547, 0.036048548378771136101, 0.014458950987090266491,
        0.03449582961951433424, 0.0085180654217106446741},
       {{{1, 1, 8}, {1, 2, 7}, {1, 3, 6}, {1, 4, 5}, {2, 2, 6}, {2, 3, 5}, {2, 4, 4},
         {3, 3, 4}}}},
      {18, 0.1293445045459248179,
       {0.042264644884382174495, 0.037612747382728147606, 0.012269135163740591697,
        0.032418835255881507148, 0.0066443861461907353503, 0.031209383843655137496,
        0.016012725269194027566, 0.020048459530857287874, 0.00011140940205963764136,
        0.016379703852242524569},
       {{{1, 1, 9}, {1, 2, 8}, {1, 3, 7}, {1, 4, 6}, {1, 5, 5}, {2, 2, 7}, {2, 3, 6},
         {2, 4, 5}, {3, 3, 5}, {3, 4, 4}}}},
      {20, 0.12060334321714883241,
       {0.037021049147158169638, 0.033284216464655714799, 0.011286937872096989149,
        0.026578619249198844515, 0.011418520257187202309, 0.031576824232321876812,
        0.0047940524464793597891, 0.031596524757547028863, 0.0028624694598798772042,
        0.0082226236031296374173, 0.00391760602597340815, 0.023692238233700031352},
       {{{1, 1, 10}, {1, 2, 9}, {1, 3, 8}, {1, 4, 7}, {1, 5, 6}, {2, 2, 8}, {2, 3, 7},
         {2, 4, 6}, {2, 5, 5}, {3, 3, 6}, {3, 4, 5}, {4, 4, 4}}}},
  };
  return table;
}

}  // namespace ado::detail
