#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace cganseg {

// Mass shape classes. The integer codes are the classifier's output columns
// and must not be reordered.
enum class ShapeLabel : int { Irregular = 0, Lobular = 1, Oval = 2, Round = 3 };
inline constexpr int kShapeClassCount = 4;
inline constexpr std::array<ShapeLabel, 4> kAllShapes = {ShapeLabel::Irregular, ShapeLabel::Lobular,
                                                         ShapeLabel::Oval, ShapeLabel::Round};

enum class Subtype : int { LuminalA = 0, LuminalB = 1, Her2 = 2, BasalLike = 3 };
inline constexpr int kSubtypeCount = 4;
inline constexpr std::array<Subtype, 4> kAllSubtypes = {Subtype::LuminalA, Subtype::LuminalB, Subtype::Her2,
                                                        Subtype::BasalLike};

constexpr int code(ShapeLabel s) { return static_cast<int>(s); }
constexpr int code(Subtype s) { return static_cast<int>(s); }

// Throws InvalidArgument outside [0,3].
ShapeLabel shape_from_code(int code);

std::string_view shape_name(ShapeLabel s);     // "irregular", ...
std::string_view subtype_name(Subtype s);      // "LuminalA", ...
// Case-insensitive; also accepts the numeric code. nullopt when unknown.
std::optional<ShapeLabel> parse_shape(std::string_view text);
// Accepts "LuminalA", "Luminal-A", "Luminal A" (any case), "Her2", "HER-2",
// "BasalLike", "Basal-like", and numeric codes.
std::optional<Subtype> parse_subtype(std::string_view text);

}  // namespace cganseg
