#include "plab/taskgen.hpp"

#include <algorithm>
#include <cstring>
#include <unordered_set>

namespace plab {
namespace {

// Uniform size-k subset of {0,..,d-1} via partial Fisher-Yates; sorted output.
std::vector<int> sample_subset(int d, int k, Rng& rng) {
  std::vector<int> pool(d);
  for (int i = 0; i < d; ++i) pool[i] = i;
  for (int i = 0; i < k; ++i) {
    int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(d - i)));
    std::swap(pool[i], pool[j]);
  }
  std::vector<int> out(pool.begin(), pool.begin() + k);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

FunctionSample sample_function(const TaskSpec& spec, Rng& rng) {
  spec.validate();
  FunctionSample f;
  f.task = spec;
  const int d = spec.dim;
  switch (spec.kind) {
    case TaskKind::LinearRegression:
    case TaskKind::LeakyReLURegression: {
      FunctionSample::Linear p;
      p.w.resize(d);
      for (int i = 0; i < d; ++i) p.w[i] = spec.mu + rng.normal();
      f.payload = std::move(p);
      break;
    }
    case TaskKind::QuadraticRegression: {
      // Each entry of W is (1/sqrt(d)) * N(mu, 1).
      FunctionSample::Quadratic p;
      p.W.resize(static_cast<size_t>(d) * d);
      const double s = 1.0 / std::sqrt(static_cast<double>(d));
      for (auto& v : p.W) v = s * (spec.mu + rng.normal());
      f.payload = std::move(p);
      break;
    }
    case TaskKind::SparseLinearRegression: {
      FunctionSample::SparseLinear p;
      p.w.assign(d, 0.0);
      std::vector<double> draws(d);
      for (int i = 0; i < d; ++i) draws[i] = spec.mu + rng.normal();
      p.idx = sample_subset(d, spec.sparsity, rng);
      for (int i : p.idx) p.w[i] = draws[i];
      f.payload = std::move(p);
      break;
    }
    case TaskKind::SparseParity: {
      FunctionSample::ParitySubset p;
      p.idx = sample_subset(d, spec.sparsity, rng);
      f.payload = std::move(p);
      break;
    }
    case TaskKind::Parity: {
      // Uniform over all 2^d subsets, any size including empty.
      FunctionSample::ParitySubset p;
      for (int i = 0; i < d; ++i)
        if (rng.below(2) == 1) p.idx.push_back(i);
      f.payload = std::move(p);
      break;
    }
    case TaskKind::GaussianRetrieval:
    case TaskKind::BooleanRetrieval:
      throw std::invalid_argument(
          "retrieval tasks are sampled via build_retrieval_prompt");
  }
  return f;
}

double eval_function(const FunctionSample& f, const double* x, int dim) {
  if (dim != f.task.dim) throw std::invalid_argument("eval_function: dimension mismatch");
  const int d = dim;
  if (auto* p = std::get_if<FunctionSample::Linear>(&f.payload)) {
    double z = 0;
    for (int i = 0; i < d; ++i) z += p->w[i] * x[i];
    if (f.task.kind == TaskKind::LeakyReLURegression && z < 0) z *= f.task.slope;
    return z;
  }
  if (auto* p = std::get_if<FunctionSample::Quadratic>(&f.payload)) {
    double z = 0;
    for (int i = 0; i < d; ++i) {
      double row = 0;
      for (int j = 0; j < d; ++j) row += p->W[static_cast<size_t>(i) * d + j] * x[j];
      z += x[i] * row;
    }
    return z;
  }
  if (auto* p = std::get_if<FunctionSample::SparseLinear>(&f.payload)) {
    double z = 0;
    for (int i : p->idx) z += p->w[i] * x[i];
    return z;
  }
  if (auto* p = std::get_if<FunctionSample::ParitySubset>(&f.payload)) {
    double z = 1.0;  // empty product is +1
    for (int i : p->idx) z *= x[i];
    return z;
  }
  if (auto* p = std::get_if<FunctionSample::Retrieval>(&f.payload)) {
    const auto& t = *p->table;
    for (size_t i = 0; i < p->rows.size(); ++i) {
      if (std::memcmp(t.key(p->rows[i]), x, sizeof(double) * d) == 0)
        return t.value(p->rows[i], p->value_choice[i]);
    }
    throw std::invalid_argument("eval_function: x is not a key of this retrieval prompt");
  }
  throw std::logic_error("eval_function: unhandled payload");
}

PromptSequence build_prompt(const TaskSpec& spec, const FunctionSample& f, int n,
                            Rng& rng) {
  if (n < 1) throw std::invalid_argument("build_prompt: n must be >= 1");
  PromptSequence p;
  p.n = n;
  p.dim = spec.dim;
  p.xs.resize(static_cast<size_t>(n) * spec.dim);
  p.ys.resize(n);
  const bool boolean = spec.modality() == Modality::Boolean;
  for (int i = 0; i < n; ++i) {
    double* x = p.xs.data() + static_cast<size_t>(i) * spec.dim;
    for (int j = 0; j < spec.dim; ++j)
      x[j] = boolean ? static_cast<double>(rng.sign()) : rng.normal();
    p.ys[i] = eval_function(f, x, spec.dim);
  }
  p.fn = f;
  return p;
}

std::shared_ptr<const RetrievalTable> build_retrieval_table(const TaskSpec& spec,
                                                            Rng& rng) {
  if (!spec.is_retrieval())
    throw std::invalid_argument("build_retrieval_table: not a retrieval task");
  spec.validate();
  const int d = spec.dim;
  auto table = std::make_shared<RetrievalTable>();
  table->task = spec;
  table->keys.resize(static_cast<size_t>(RetrievalTable::kRows) * d);
  table->values.resize(static_cast<size_t>(RetrievalTable::kRows) *
                       RetrievalTable::kValuesPerKey);
  const bool boolean = spec.kind == TaskKind::BooleanRetrieval;

  if (boolean) {
    // Distinct keys drawn without replacement from {±1}^d; resample on
    // collision. Requires 2^d >= 1024 (checked in validate()).
    std::unordered_set<std::uint64_t> seen;
    for (int i = 0; i < RetrievalTable::kRows; ++i) {
      std::uint64_t bits;
      double* key = table->keys.data() + static_cast<size_t>(i) * d;
      do {
        bits = 0;
        for (int j = 0; j < d; ++j) {
          int s = rng.sign();
          key[j] = s;
          if (s > 0) bits |= (1ull << j);
        }
      } while (!seen.insert(bits).second);
    }
  } else {
    for (auto& k : table->keys) k = rng.normal();
  }
  for (auto& v : table->values)
    v = boolean ? static_cast<double>(rng.sign()) : rng.normal();
  return table;
}

RetrievalPrompt build_retrieval_prompt(const std::shared_ptr<const RetrievalTable>& table,
                                       int n, Rng& rng) {
  if (!table) throw std::invalid_argument("build_retrieval_prompt: null table");
  if (n - 1 > RetrievalTable::kRows)
    throw std::invalid_argument("build_retrieval_prompt: n-1 exceeds table size");
  if (n < 2) throw std::invalid_argument("build_retrieval_prompt: n must be >= 2");
  const TaskSpec& spec = table->task;
  const int d = spec.dim;

  FunctionSample::Retrieval payload;
  payload.table = table;
  payload.rows = sample_subset(RetrievalTable::kRows, n - 1, rng);
  // sample_subset sorts; re-shuffle so prompt order is uniform among the rows.
  for (int i = n - 2; i > 0; --i) {
    int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i + 1)));
    std::swap(payload.rows[i], payload.rows[j]);
  }
  payload.value_choice.resize(n - 1);
  for (auto& c : payload.value_choice)
    c = static_cast<int>(rng.below(RetrievalTable::kValuesPerKey));
  payload.query_index = static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1)));

  RetrievalPrompt out;
  out.query_index = payload.query_index;
  PromptSequence& p = out.prompt;
  p.n = n;
  p.dim = d;
  p.xs.resize(static_cast<size_t>(n) * d);
  p.ys.resize(n);
  for (int i = 0; i < n - 1; ++i) {
    std::memcpy(p.xs.data() + static_cast<size_t>(i) * d, table->key(payload.rows[i]),
                sizeof(double) * d);
    p.ys[i] = table->value(payload.rows[i], payload.value_choice[i]);
  }
  std::memcpy(p.xs.data() + static_cast<size_t>(n - 1) * d,
              table->key(payload.rows[payload.query_index]), sizeof(double) * d);
  out.target = p.ys[payload.query_index];
  p.ys[n - 1] = out.target;
  p.fn.task = spec;
  p.fn.payload = std::move(payload);
  return out;
}

TableSet::TableSet(const MixtureSpec& mix, Rng rng) {
  tables_.resize(mix.entries.size());
  for (size_t m = 0; m < mix.entries.size(); ++m) {
    if (mix.entries[m].task.is_retrieval()) {
      Rng stream = rng.substream(m);
      tables_[m] = build_retrieval_table(mix.entries[m].task, stream);
    }
  }
}

std::vector<PromptSequence> build_batch(const MixtureSpec& mix, int batch_size,
                                        int n, Rng& rng, const TableSet& tables) {
  const std::vector<int> counts = mix.counts(batch_size);
  std::vector<PromptSequence> batch;
  batch.reserve(batch_size);
  for (size_t m = 0; m < mix.entries.size(); ++m) {
    const TaskSpec& spec = mix.entries[m].task;
    for (int j = 0; j < counts[m]; ++j) {
      PromptSequence p;
      if (spec.is_retrieval()) {
        p = build_retrieval_prompt(tables.table(static_cast<int>(m)), n, rng).prompt;
      } else {
        FunctionSample f = sample_function(spec, rng);
        p = build_prompt(spec, f, n, rng);
      }
      p.task_id = static_cast<int>(m);
      batch.push_back(std::move(p));
    }
  }
  return batch;
}

}  // namespace plab
