// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef SMM_CORE_MODEL_IO_HPP
#define SMM_CORE_MODEL_IO_HPP

#include <string>

#include "core/mixture.hpp"

namespace smm {

// Versioned human-auditable text format with the schema embedded and all
// floats written as full-precision decimals (%.17g), so a load reproduces
// the saved model bit for bit. Trees are stored pre-order: a `split` line is
// followed by its true subtree then its false subtree.
void save_model(const StagedMixture& m, const std::string& path);
StagedMixture load_model(const std::string& path);

std::string format_model(const StagedMixture& m);
StagedMixture parse_model_text(const std::string& text,
                               const std::string& origin);

}  // namespace smm

#endif  // SMM_CORE_MODEL_IO_HPP
