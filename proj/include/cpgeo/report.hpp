#pragma once

#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "cpgeo/paradigms.hpp"

namespace cpgeo::report {

using nlohmann::json;

json to_json(const paradigms::RsaRun& run);
json to_json(const paradigms::H4Run& run);
json to_json(const paradigms::IdentificationResult& result);
json to_json(const paradigms::DiscriminationResult& result);
json to_json(const std::vector<paradigms::PrecisionLayerResult>& layers);
json to_json(const std::vector<paradigms::ProbeLayerResult>& layers);
json to_json(const paradigms::PatchVectorSet& set);
json to_json(const std::vector<paradigms::SpecificityRow>& rows);
json to_json(const std::vector<paradigms::RotationLayerResult>& layers);
json to_json(const paradigms::LambdaBetaRun& run);
json to_json(const stats::CorrelationTest& test);
json to_json(const fitting::SigmoidFit& fit);

// Serialized document text: sorted keys, two-space indent, trailing newline.
std::string dump(const json& document);

void print_rsa(std::ostream& out, const paradigms::RsaRun& run);
void print_h4(std::ostream& out, const paradigms::H4Run& run);
void print_identification(std::ostream& out, const paradigms::IdentificationResult& result);
void print_discrimination(std::ostream& out, const paradigms::DiscriminationResult& result);
void print_precision(std::ostream& out, const std::vector<paradigms::PrecisionLayerResult>& layers);
void print_probe(std::ostream& out, const std::vector<paradigms::ProbeLayerResult>& layers);
void print_rotation(std::ostream& out, const std::vector<paradigms::RotationLayerResult>& layers);
void print_lambda_beta(std::ostream& out, const paradigms::LambdaBetaRun& run);

}  // namespace cpgeo::report
