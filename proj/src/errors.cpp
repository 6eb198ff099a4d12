#include "resq/errors.hpp"

namespace resq {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::malformed_line: return "MalformedLine";
    case Errc::negative_price: return "NegativePrice";
    case Errc::empty_selection: return "EmptySelection";
    case Errc::boundary_out_of_range: return "BoundaryOutOfRange";
    case Errc::missing_series: return "MissingSeries";
    case Errc::uncovered_interval: return "UncoveredInterval";
    case Errc::missing_choice: return "MissingChoice";
    case Errc::index_out_of_bounds: return "IndexOutOfBounds";
    case Errc::series_too_short: return "SeriesTooShort";
    case Errc::unfitted: return "Unfitted";
    case Errc::empty_history: return "EmptyHistory";
    case Errc::bad_config: return "BadConfig";
    case Errc::illegal_action: return "IllegalAction";
    case Errc::episode_finished: return "EpisodeFinished";
    case Errc::area_too_large: return "AreaTooLarge";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::non_finite_gradient: return "NonFiniteGradient";
    case Errc::non_finite_loss: return "NonFiniteLoss";
    case Errc::no_legal_action: return "NoLegalAction";
    case Errc::insufficient_data: return "InsufficientData";
    case Errc::empty_area_source: return "EmptyAreaSource";
    case Errc::empty_area_set: return "EmptyAreaSet";
    case Errc::zero_baseline: return "ZeroBaseline";
    case Errc::io_error: return "IoError";
    case Errc::version_mismatch: return "VersionMismatch";
  }
  return "Unknown";
}

}  // namespace resq
