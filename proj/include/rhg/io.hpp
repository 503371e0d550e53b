#pragma once

#include <string>

#include "rhg/cutlocus.hpp"
#include "rhg/types.hpp"

#include <nlohmann/json.hpp>

namespace rhg::io {

using Json = nlohmann::ordered_json;

// 17 significant digits: enough to round-trip an IEEE double exactly.
std::string format_double(double v);

// Point schema: {"q":int,"p":int,"x":[[..]],"y":[..],"t":[..]} with x stored
// as p columns of length q (column-major).  Covector schema drops q/p and uses
// keys xi/eta/tau with the same layout.
Json point_to_json(const GroupPoint& g);
Json covector_to_json(const Covector& c);
GroupPoint point_from_json(const Json& j);
Covector covector_from_json(const Json& j);

// Classification report; embeds the canonical recovered covector when Cut.
Json classification_to_json(const GroupPoint& g, const cutlocus::CutClassification& cls);

std::string verdict_string(cutlocus::Verdict v);
std::string multiplicity_string(cutlocus::Multiplicity m);
std::string conjugate_string(cutlocus::ConjugateFlag c);

// CSV layer: header x_11..x_qp,y_1..y_p,t_1..t_q (x column-major), LF endings.
std::string csv_header(const GroupShape& shape);
std::string csv_row(const GroupPoint& g);
GroupPoint point_from_csv_row(const std::string& line, const GroupShape& shape);

}  // namespace rhg::io
