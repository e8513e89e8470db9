#pragma once

#include <string>
#include <vector>

#include "dhn/problem.hpp"

namespace dhn {

// Network documents are JSON with a mandatory schema_version and strictly
// checked keys (see docs/network_format.md).  Parsing failures and
// structural problems surface as ValidationError with the offending key or
// entity named.
Problem parse_problem(const std::string& text);
Problem load_problem(const std::string& path);

// Canonical explicit serialization: mirror expansion applied, entities
// sorted by id, every section written out.  parse(serialize(p)) == p.
std::string serialize_problem(const Problem& p);
void save_problem(const Problem& p, const std::string& path);

// A stand-alone catalog document: the catalog section as its own object.
PipeCatalog parse_catalog_text(const std::string& text);

// Dotted-path overrides applied to the document before parsing
// ("solver.mu0=100", "edges.P1_sup.producer.c_heat_opex=5e-6").  Array
// steps select the element whose id matches; the final key must already
// exist and keep its JSON type.
std::string apply_patches(const std::string& text,
                          const std::vector<std::string>& sets);

// FNV-1a (64 bit) of the canonical serialization, 16 hex digits.  Stamped
// into every report so outputs can be traced to their exact configuration.
std::string config_hash(const Problem& p);

// Design files key every value by edge id, so they survive reordering of
// the network document.
std::string serialize_design(const Problem& p, const DesignPoint& d);
DesignPoint parse_design(const Problem& p, const std::string& text);
void save_design(const Problem& p, const DesignPoint& d,
                 const std::string& path);
DesignPoint load_design(const Problem& p, const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace dhn
