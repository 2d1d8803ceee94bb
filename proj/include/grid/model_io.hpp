#pragma once

#include <string>

#include "grid/ecoc.hpp"
#include "grid/signal.hpp"

namespace grid {

// Model file ("model" container): format version, feature-space spec,
// class names, coding matrix, learner weights and fitted extractor
// statistics. Round-trips are bit-exact on every numeric field.
void save_model(const ECOCModel& model, const std::string& path);
ECOCModel load_model(const std::string& path);

// Dataset cache ("dataset" container): class list plus every recording.
void save_dataset(const Dataset& dataset, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace grid
