#include <stdio.h>
#include "paredlab.h"

#define CHECK(call)                                                        \
  do {                                                                     \
    enum PlStatus s_ = (call);                                             \
    if (s_ != PL_STATUS_OK) {                                              \
      fprintf(stderr, "%s: %d %s\n", #call, (int)s_, paredlab_last_error()); \
      return 1;                                                            \
    }                                                                      \
  } while (0)

int main(void) {
  PlGraph *k4 = NULL, *c4 = NULL;
  CHECK(paredlab_graph_fixture("K4", &k4));
  CHECK(paredlab_graph_fixture("C4", &c4));
  int bounded = -1, bif = -1;
  size_t classes = 0, atlas = 0;
  CHECK(paredlab_graph_verdict(k4, &bounded));
  CHECK(paredlab_graph_bifurcates(c4, k4, &bif, &classes));
  CHECK(paredlab_atlas_count(4, &atlas));
  printf("K4 bounded %d; C4 -> K4 bifurcates %d with N = %zu; atlas(4) = %zu\n", bounded, bif, classes, atlas);
  paredlab_graph_free(k4);
  paredlab_graph_free(c4);

  PlMap *f = NULL;
  CHECK(paredlab_map_new(NULL, 0, &f));
  PlMap *g = NULL;
  CHECK(paredlab_map_new(NULL, 0, &g));
  paredlab_map_free(g);
  double mult[2];
  CHECK(paredlab_map_multipliers(f, mult, 2));
  printf("z^2 conj multipliers %.12f %.12f\n", mult[0], mult[1]);
  paredlab_map_free(f);

  PlTrace *t = NULL;
  CHECK(paredlab_rotation_trace(3, 1, 64, 3, &t));
  size_t perm[4], len = 0;
  int32_t word[16];
  CHECK(paredlab_trace_permutation(t, perm, 4));
  CHECK(paredlab_trace_braid(t, word, 16, &len));
  printf("permutation %zu %zu %zu %zu; braid length %zu\n", perm[0], perm[1], perm[2], perm[3], len);
  paredlab_trace_free(t);

  if (paredlab_atlas_count(9, &atlas) != PL_STATUS_SIZE_LIMIT) return 1;
  printf("size limit: %s\n", paredlab_last_error());
  return 0;
}
