#pragma once

#include <nlohmann/json.hpp>

#include "tailchain/assess.hpp"
#include "tailchain/data.hpp"
#include "tailchain/engine.hpp"
#include "tailchain/hm.hpp"
#include "tailchain/response.hpp"

namespace tailchain {

using json = nlohmann::json;

void to_json(json& j, const GPDParams& p);
void from_json(const json& j, GPDParams& p);
void to_json(json& j, const SemiParametricMarginal& m);
void from_json(const json& j, SemiParametricMarginal& m);
void to_json(json& j, const IrregularMatrix& m);
void from_json(const json& j, IrregularMatrix& m);
void to_json(json& j, const ResidualSample& r);
void from_json(const json& j, ResidualSample& r);
void to_json(json& j, const PeakModel& p);
void from_json(const json& j, PeakModel& p);
void to_json(json& j, const MMEMParams& p);
void from_json(const json& j, MMEMParams& p);
void to_json(json& j, const ReparamMap& m);
void from_json(const json& j, ReparamMap& m);
void to_json(json& j, const EVARParams& p);
void from_json(const json& j, EVARParams& p);
void to_json(json& j, const ChainModel& c);
void from_json(const json& j, ChainModel& c);
void to_json(json& j, const WaveDirModel& m);
void from_json(const json& j, WaveDirModel& m);
void to_json(json& j, const WindOffsetModel& m);
void from_json(const json& j, WindOffsetModel& m);
void to_json(json& j, const DirectionModels& m);
void from_json(const json& j, DirectionModels& m);
void to_json(json& j, const ExcursionModel& m);
void from_json(const json& j, ExcursionModel& m);
void to_json(json& j, const StormEntry& s);
void from_json(const json& j, StormEntry& s);
void to_json(json& j, const WindSpeedRegression& r);
void from_json(const json& j, WindSpeedRegression& r);
void to_json(json& j, const StormMaxModel& m);
void from_json(const json& j, StormMaxModel& m);
void to_json(json& j, const HMModel& m);
void from_json(const json& j, HMModel& m);
void to_json(json& j, const Excursion& e);
void from_json(const json& j, Excursion& e);
void to_json(json& j, const SyntheticSpec& s);
void from_json(const json& j, SyntheticSpec& s);
void to_json(json& j, const ResponseConfig& c);
void from_json(const json& j, ResponseConfig& c);
void to_json(json& j, const CVReport& r);

}  // namespace tailchain
