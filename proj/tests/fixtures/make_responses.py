#!/usr/bin/env python3
"""Writes the scripted model responses used to record the fixture cassettes.

Run from this directory, then regen_cassettes.sh to re-record.
"""
import json
import os

HERE = os.path.dirname(os.path.abspath(__file__))


def response(reflection, plan, fact, thought, action, action_input):
    return (
        f"Reflection: {reflection}\n"
        f"Research Plan and Status: {plan}\n"
        f"Fact Check: {fact}\n"
        f"Thought: {thought}\n"
        f"Action: {action}\n"
        f"Action Input: {json.dumps(action_input)}\n"
    )


def read(name):
    with open(os.path.join(HERE, name)) as f:
        return f.read()


IMPLEMENTATION = read("toy_implementation.py")

PLAN = (
    "1. List and understand the input files. 2. Add standardization to the starter code and save it as "
    "methodology_implementation.py. 3. Execute it and compare with 0.5250. 4. Check the implementation. "
    "5. Submit."
)

toy_planner = [
    response("Nothing has happened yet.", PLAN + " Status: starting step 1.", "Nothing to check yet.",
             "First see which files are present.", "List Files", {"directory path": "."}),
    response("All five input files are present.", PLAN + " Status: files listed.",
             "The five files are present: confirmed by the listing.",
             "Read the methodology to learn what has to change.", "Understand File",
             {"file name": "methodology_description.txt",
              "things to look for": "the steps of the methodology and what they change in the starter code"}),
    response("The methodology standardizes both features with training statistics before fitting centroids.",
             PLAN + " Status: step 1 done.", "Three steps: confirmed by the Understand File observation.",
             "Write the implementation in one edit.", "Edit Script",
             {"script name": "starter_code.py",
              "edit instructions": "Add feature_stats(rows) returning per-feature means and population standard "
                                   "deviations, and standardize(rows, means, stds). In main, compute the statistics "
                                   "on the training split and standardize both splits before computing centroids.",
              "save script name": "methodology_implementation.py"}),
    response("The edit added the two helpers and standardizes both splits.", PLAN + " Status: step 2 done.",
             "The diff shows the helpers: confirmed by the edit observation.",
             "Run the new script to measure accuracy.", "Execute Script",
             {"script name": "methodology_implementation.py", "arguments": ""}),
    response("The script runs cleanly and reports 0.7200 against the baseline 0.5250.",
             PLAN + " Status: step 3 done, accuracy 0.7200.",
             "Accuracy 0.7200: confirmed by the execution observation.",
             "Check every subpart before submitting.", "Check Implementation",
             {"script name": "methodology_implementation.py"}),
    response("All three subparts are implemented.", PLAN + " Status: step 4 done.",
             "All subparts implemented: confirmed by Check Implementation.",
             "The implementation is complete and better than the baseline.", "Final Answer",
             {"description": "methodology_implementation.py standardizes features with training statistics before "
                             "nearest-centroid classification; test accuracy 0.7200 versus 0.5250 for the starter code."}),
]

toy_workers = {
    "worker/understand_file": [
        "The methodology has three steps: (1) estimate per-feature mean and standard deviation on the training "
        "split, (2) standardize train and test with those statistics, (3) fit centroids and classify in the "
        "standardized space. The starter code skips steps 1 and 2."
    ],
    "worker/edit_script": ["Here is the edited script.\n\n```python\n" + IMPLEMENTATION + "```\n"],
    "worker/decompose_methodology": [
        "1. Estimate the mean and standard deviation of every feature on the training split.\n"
        "2. Standardize the training and test splits with the training statistics.\n"
        "3. Fit centroids on the standardized training data and classify test points by nearest centroid.\n"
    ],
    "worker/check_implementation": [
        "STATUS: implemented\nSNIPPET:\ndef feature_stats(rows):\n    n = len(rows)\nPROPOSED EDIT:\nnone\n",
        "STATUS: implemented\nSNIPPET:\ntrain = standardize(train, means, stds)\ntest = standardize(test, means, stds)\n"
        "PROPOSED EDIT:\nnone\n",
        "STATUS: implemented\nSNIPPET:\ncents = centroids(train)\nPROPOSED EDIT:\nnone\n",
    ],
    "worker/summarize_log": [
        "Step 0: listed the working directory; all five input files are present.",
        "Steps 0-1: files present; the methodology standardizes features with training statistics before "
        "nearest-centroid classification.",
        "Steps 0-2: files present; methodology understood; methodology_implementation.py created with "
        "feature_stats and standardize.",
        "Steps 0-3: implementation executed cleanly with test accuracy 0.7200 (baseline 0.5250).",
        "Steps 0-4: accuracy 0.7200; Check Implementation reports all three subparts implemented.",
        "Steps 0-5: final answer submitted for methodology_implementation.py with accuracy 0.7200.",
    ],
}

queues = {"base_planner/planner": toy_planner}
queues.update(toy_workers)

with open(os.path.join(HERE, "responses", "toy_agent.json"), "w") as f:
    json.dump({"queues": queues}, f, indent=2)
    f.write("\n")

with open(os.path.join(HERE, "responses", "single.json"), "w") as f:
    json.dump({"queues": {"base_planner/single_call": [
        "The edited script follows.\n\n```python\n" + IMPLEMENTATION + "```\n"]}}, f, indent=2)
    f.write("\n")
