// Smallest end-to-end use of the library: load the bundled seven-stock
// instance, build LINEAR intuitionistic fuzzy goals and solve the min-max
// program.

#include <iostream>

#include "ifport/ifport.hpp"

int main() {
  using namespace ifport;

  const auto model = load_model(IFPORT_DATA_DIR "/paper_instance.model");
  const auto bounds = compute_bounds(model);

  std::vector<IFGoal> goals;
  for (Criterion c : kAllCriteria) {
    goals.push_back(make_goal(c, bounds, MembershipShape::linear(ShapeRole::Membership),
                              MembershipShape::linear(ShapeRole::Nonmembership)));
  }
  const ScalarizedProblem problem(model, std::move(goals));
  const auto report = minimize(PhiObjective(problem), SolverConfig{});

  const Vector& x = report.x_star.vector();
  std::cout << "x*     = " << x.transpose() << "\n"
            << "Phi    = " << report.objective << "\n"
            << "E(x)   = " << expected_return(model, x) << "\n"
            << "V(x)   = " << variance(model, x) << "\n"
            << "Sr(x)  = " << sharpe_ratio(model, x) << "\n";
}
