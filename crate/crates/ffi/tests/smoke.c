#include <stdio.h>
#include <string.h>

#include "antisym.h"

#define CHECK(cond)                                                   \
  do {                                                                \
    if (!(cond)) {                                                    \
      fprintf(stderr, "line %d: %s (%s)\n", __LINE__, #cond,          \
              antisym_last_error());                                  \
      return 1;                                                       \
    }                                                                 \
  } while (0)

int main(void) {
  size_t ints[3] = {0, 1, 2};
  AntisymOrbitals *orb = NULL;
  CHECK(antisym_orbitals_from_integers(3, ints, 3, &orb) == ANTISYM_STATUS_OK);

  AntisymCircuit *circ = NULL;
  CHECK(antisym_build(orb, ANTISYM_VARIANT_RECURSIVE, true, &circ) == ANTISYM_STATUS_OK);

  AntisymVerifyReport rep;
  CHECK(antisym_verify(circ, orb, &rep) == ANTISYM_STATUS_OK);
  CHECK(rep.overlap > 1.0 - 1e-10);
  CHECK(rep.ancilla_zero_probability > 1.0 - 1e-10);

  AntisymCircuit *low = NULL;
  CHECK(antisym_circuit_lower(circ, &low) == ANTISYM_STATUS_OK);
  AntisymGateCounts counts;
  CHECK(antisym_circuit_counts(low, &counts) == ANTISYM_STATUS_OK);
  CHECK(counts.clifford == 171 && counts.t_like == 110);

  char *text = NULL;
  CHECK(antisym_circuit_to_text(low, &text) == ANTISYM_STATUS_OK);
  AntisymCircuit *back = NULL;
  CHECK(antisym_circuit_from_text(text, &back) == ANTISYM_STATUS_OK);
  CHECK(antisym_circuit_qubits(back) == antisym_circuit_qubits(low));
  antisym_string_free(text);

  size_t dup[2] = {1, 1};
  AntisymOrbitals *bad = NULL;
  CHECK(antisym_orbitals_from_integers(1, dup, 2, &bad) == ANTISYM_STATUS_NOT_ORTHOGONAL);
  CHECK(bad == NULL);
  CHECK(strlen(antisym_last_error()) > 0);

  uint64_t comp = 0;
  CHECK(antisym_n_comp(65, &comp) == ANTISYM_STATUS_OK && comp == 1471);

  antisym_circuit_free(back);
  antisym_circuit_free(low);
  antisym_circuit_free(circ);
  antisym_orbitals_free(orb);
  printf("ok %s\n", antisym_version());
  return 0;
}
