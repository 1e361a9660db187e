"""Bandits with random-walk trajectory feedback on absorbing Markov chains."""

from .chain import (ChainInstance, ChainValidationError, Centrality, ValidationReport,
                    choose_cap, cover_probs, effective_arm_count,
                    effective_arm_count_from_centralities, expected_hitting_times,
                    exploration_cost, first_passage_probs, hitting_centrality,
                    validate, walk_tail_bound)
from .exp3 import Exp3Params, StandardExp3, TrajectoryExp3, default_params, softmax
from .feedback import (FeedbackLedger, estimated_cover_probs, expected_cover_probs,
                       extract_all_samples, extract_sample)
from .harness import (RunRecord, adversarial_comparison, best_fixed_regret,
                      epoch_expected_lengths, regret_vs_fixed, run_adversarial,
                      run_stochastic, stochastic_learning_curves)
from .instances import builtin_instance, nine_node_ring, ring_length_process, two_node_instance
from .lowerbounds import (BernoulliFamily, TwoNodePair, bernoulli_family, family_gap,
                          family_regret_bound, family_step_kl, minimax_eps, minimax_value,
                          per_step_kl, regret_lower_bound, trajectory_kl, two_node_gap,
                          two_node_gap_closed, two_node_pair)
from .simulate import (ABSORBED, BernoulliLengths, FixedLengths, LengthProcess,
                       ScheduleLengths, SharedGaussianAbsorbLengths, Trajectory,
                       clipped_gaussian_mean, rng_at, sample_trajectory,
                       trajectory_length)
from .ucb import StandardUcb, TrajectoryUcb, confidence, scaled_confidence, truncation_level

__version__ = "0.1.0"
