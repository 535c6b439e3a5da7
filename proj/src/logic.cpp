#include "djinn/logic.hpp"

#include "djinn/error.hpp"

namespace djinn {

std::string to_string(LogicGate gate) {
  switch (gate) {
    case LogicGate::if_gate: return "if";
    case LogicGate::or_gate: return "or";
    case LogicGate::xor_gate: return "xor";
  }
  return "unknown";
}

Dataset truth_table(LogicGate gate) {
  Dataset ds;
  ds.task = Task::classification;
  ds.n_classes = 2;
  ds.class_labels = {"0", "1"};
  if (gate == LogicGate::if_gate) {
    ds.feature_names = {"x"};
    ds.features = (Matrix(2, 1) << 0, 1).finished();
    ds.targets = (Matrix(2, 1) << 0, 1).finished();
    return ds;
  }
  ds.feature_names = {"x", "y"};
  ds.features = (Matrix(4, 2) << 0, 0, 0, 1, 1, 0, 1, 1).finished();
  ds.targets.resize(4, 1);
  for (Eigen::Index i = 0; i < 4; ++i) {
    const bool x = ds.features(i, 0) > 0.5;
    const bool y = ds.features(i, 1) > 0.5;
    ds.targets(i, 0) = gate == LogicGate::or_gate ? (x || y) : (x != y);
  }
  return ds;
}

LogicRun run_logic_gate(LogicGate gate, std::uint64_t seed, int epochs,
                        double learning_rate) {
  const Dataset table = truth_table(gate);
  TreeConfig tc;
  tc.max_depth = 2;
  tc.subsample = FeatureSubsample::all;
  tc.bootstrap = false;
  LogicRun run{fit_tree(table.features, table.targets, Task::classification, tc, seed, 2),
               {}, {}, {}, 0, static_cast<int>(table.n_samples())};
  const TreeTopology topo = analyze_topology(run.tree);
  run.initial = prune_dead_neurons(
      map_tree(run.tree, topo, static_cast<int>(table.n_features()), 2, seed));

  TrainingConfig cfg;
  cfg.epochs = epochs;
  cfg.learning_rate = learning_rate;
  cfg.batch_size = 1;
  cfg.loss = Loss::softmax_xent;
  cfg.shuffle_seed = seed;
  auto trained = train(run.initial.net, table.features, table.targets, cfg);
  run.trained = std::move(trained.net);
  run.history = std::move(trained.history);
  const Matrix probs = predict(run.trained, table.features);
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    Eigen::Index label = 0;
    probs.row(i).maxCoeff(&label);
    run.correct += static_cast<int>(label) == static_cast<int>(table.targets(i, 0));
  }
  return run;
}

}  // namespace djinn
