#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rosa/core/types.hpp"

namespace rosa::metrics {

double iou_1d(double a_start, double a_end, double b_start, double b_end);

// Average precision over the all-point interpolated PR curve.
// Detections sorted by score descending (ties: earlier t_start); greedy
// match to the highest-IoU unmatched ground truth at the threshold.
// class_agnostic pools everything; otherwise APs are averaged over the
// classes present in the ground truth.
std::optional<double> average_precision(const std::vector<DetectedSegment>& detections,
                                        const std::vector<EventAnnotation>& ground_truth,
                                        double iou_threshold = 0.5, bool class_agnostic = true);

double compute_ahi(std::size_t n_events, double tst_h);
double compute_ahi(const std::vector<EventAnnotation>& events, double tst_h);
double compute_ahi(const std::vector<DetectedSegment>& detections, double tst_h);

// ICC(2,1): two-way random effects, absolute agreement, single measure.
std::optional<double> icc21(const std::vector<std::pair<double, double>>& pairs);

// 3% oxygen desaturation index; an event ends once the trace recovers
// >= 1 point from its nadir.
double odi3(const SpO2Trace& s, double tst_h);

struct DiagnosticMetrics {
    std::optional<double> sensitivity;
    std::optional<double> specificity;
    double accuracy = 0;
    std::optional<double> kappa;
};

DiagnosticMetrics diagnostic_metrics(const std::vector<std::pair<double, double>>& ahi_pairs,
                                     double threshold);
DiagnosticMetrics diagnostic_from_counts(int tp, int tn, int fp, int fn);

struct BlandAltman {
    double bias = 0;
    double loa_lower = 0;
    double loa_upper = 0;
};

BlandAltman bland_altman(const std::vector<std::pair<double, double>>& pairs);

struct MethodReport {
    std::string method;
    std::optional<double> ap50;            // class-agnostic, pooled over the cohort
    std::optional<double> ap50_per_class;  // averaged over classes present
    std::optional<double> icc;
    std::vector<std::pair<double, double>> ahi_pairs;  // (true, estimated) per subject
    std::map<int, DiagnosticMetrics> diagnostics;      // keyed by AHI threshold
    BlandAltman ba;
};

struct AgreementReport {
    std::vector<MethodReport> methods;
};

struct SessionEval {
    std::vector<EventAnnotation> ground_truth;
    std::vector<DetectedSegment> detections;  // scored output of one method
    SpO2Trace spo2;                           // used by the odi3 method
    double tst_h = 0;
};

// One Table-style report row per named method. Detections with score >=
// decision_threshold count toward AHI; all of them enter the PR curve.
MethodReport evaluate_method(const std::string& name, const std::vector<SessionEval>& sessions,
                             double decision_threshold = 0.5);
MethodReport evaluate_odi3(const std::vector<SessionEval>& sessions);

void save_report_json(const AgreementReport& r, const std::filesystem::path& file,
                      double decision_threshold);
void save_report_csv(const AgreementReport& r, const std::filesystem::path& file);
void save_pairs_csv(const std::vector<std::pair<double, double>>& pairs,
                    const std::filesystem::path& file);

}  // namespace rosa::metrics
