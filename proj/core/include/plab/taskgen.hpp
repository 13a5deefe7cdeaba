#pragma once

#include <memory>

#include "plab/rng.hpp"
#include "plab/task.hpp"

namespace plab {

// Samples f ~ D_F. Deterministic per (spec, rng); advances rng.
FunctionSample sample_function(const TaskSpec& spec, Rng& rng);

// Exact f(x). Boolean tasks expect x in {±1}^d. Throws on dimension mismatch.
double eval_function(const FunctionSample& f, const double* x, int dim);

// xs drawn i.i.d. from D_X (standard normal / uniform ±1), ys via eval_function.
PromptSequence build_prompt(const TaskSpec& spec, const FunctionSample& f, int n,
                            Rng& rng);

// Retrieval table construction and prompt sampling (§ keys pairwise distinct;
// boolean d=10 enumerates the full {±1}^10 cube).
std::shared_ptr<const RetrievalTable> build_retrieval_table(const TaskSpec& spec,
                                                            Rng& rng);

struct RetrievalPrompt {
  PromptSequence prompt;   // xs = keys + query, ys = shown values + target
  double target = 0.0;
  int query_index = 0;     // p in {0,..,n-2}
};
RetrievalPrompt build_retrieval_prompt(const std::shared_ptr<const RetrievalTable>& table,
                                       int n, Rng& rng);

// Immutable retrieval tables for the retrieval entries of a mixture, built
// once per run from a dedicated substream.
class TableSet {
 public:
  TableSet() = default;
  TableSet(const MixtureSpec& mix, Rng rng);
  std::shared_ptr<const RetrievalTable> table(int task_id) const {
    return tables_[task_id];
  }

 private:
  std::vector<std::shared_ptr<const RetrievalTable>> tables_;
};

// Appendix-style batch assembly: for each mixture entry m, B*weight_m fresh
// (f, prompt) pairs, grouped in mixture order.
std::vector<PromptSequence> build_batch(const MixtureSpec& mix, int batch_size,
                                        int n, Rng& rng,
                                        const TableSet& tables = {});

}  // namespace plab
