# %% [markdown]
# # Running the registered scenarios
#
# Every scenario is a deterministic function of its parameters and returns a
# report of residual checks.  Some checks are marked as expected failures:
# they document a statement that must *not* hold (for instance the rank test
# on the null hyperplane).

# %%
from llcartan.scenarios import emit_report, list_scenarios, run_scenario

for entry in list_scenarios():
    print(f"{entry['name']:24s} {entry['description']}")

# %%
report = run_scenario("flat-null-hyperplane", {"seed": 1})
print(emit_report(report, "text").decode())

# %% [markdown]
# The same run from the shell:
#
#     llcartan run flat-null-hyperplane --seed 1 --format text
#     llcartan verify-all --seed 42 > reports.json
