#pragma once

#include <string>

#include "sblab/balance_system.hpp"
#include "sblab/sbl_candidate.hpp"

namespace sblab {

// Model files are line-oriented text with `#` comments and sections
// [system], [fields], [density], [flux.1].. and [production]; see
// docs/file-formats.md for the full grammar.
BalanceSystem parse_model_text(const std::string& text);
BalanceSystem load_model_file(const std::string& path);
std::string render_model_text(const BalanceSystem& sys);

// Candidate files carry one expression per section [K0], [K.1].., [Q].
SblCandidate parse_sbl_text(const std::string& text, const BalanceSystem& sys);
SblCandidate load_sbl_file(const std::string& path, const BalanceSystem& sys);
std::string render_sbl_text(const SblCandidate& cand);

}  // namespace sblab
