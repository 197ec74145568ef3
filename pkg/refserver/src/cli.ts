/**
 * Command line entry point.
 *
 *   refserver --port 9000 --model rule --boxes '[{"lo":[...],"hi":[...]}]'
 *   refserver --port 9000 --model mlp --weights weights.json
 *   refserver train --csv samples.csv --out weights.json --seed 7
 *
 * In serve mode the bound address is announced on stdout as
 * "listening on <host>:<port>" so callers can use --port 0.
 */

import * as fs from "fs";

import { classifyMlp, loadWeights } from "./mlp";
import { BoxSpec, classifyRule, makeRuleModel } from "./rule";
import { ClassifyFn, startServer } from "./server";
import { accuracy, parseCsv, trainToy, weightsToJson } from "./train";

interface Flags {
  [key: string]: string;
}

function parseFlags(argv: string[]): Flags {
  const flags: Flags = {};
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) {
      throw new Error(`unexpected argument ${arg}`);
    }
    const value = argv[i + 1];
    if (value === undefined || value.startsWith("--")) {
      throw new Error(`flag ${arg} needs a value`);
    }
    flags[arg.slice(2)] = value;
    i++;
  }
  return flags;
}

function runTrain(argv: string[]): number {
  const flags = parseFlags(argv);
  const csvPath = flags["csv"];
  const outPath = flags["out"];
  const seed = Number(flags["seed"] ?? "0");
  if (!csvPath || !outPath) {
    console.error("usage: refserver train --csv <file> --out <weights.json> [--seed N]");
    return 2;
  }
  let text: string;
  try {
    text = fs.readFileSync(csvPath, "utf-8");
  } catch (err) {
    console.error(`cannot read ${csvPath}: ${err instanceof Error ? err.message : err}`);
    return 2;
  }
  try {
    const set = parseCsv(text);
    const mlp = trainToy(set, seed);
    fs.writeFileSync(outPath, weightsToJson(mlp));
    console.log(`trained on ${set.features.length} rows, accuracy ${accuracy(mlp, set).toFixed(3)}`);
    return 0;
  } catch (err) {
    console.error(err instanceof Error ? err.message : String(err));
    return 2;
  }
}

async function runServe(argv: string[]): Promise<number> {
  const flags = parseFlags(argv);
  const port = Number(flags["port"] ?? "9000");
  const model = flags["model"] ?? "rule";
  let classify: ClassifyFn;
  if (model === "rule") {
    const boxes = JSON.parse(flags["boxes"] ?? "[]") as BoxSpec[];
    const baseLabel = Number(flags["base-label"] ?? "1");
    const rule = makeRuleModel(baseLabel, boxes);
    classify = (x) => classifyRule(rule, x);
  } else if (model === "mlp") {
    const weightsPath = flags["weights"];
    if (!weightsPath) {
      console.error("--model mlp needs --weights <file>");
      return 2;
    }
    const mlp = loadWeights(fs.readFileSync(weightsPath, "utf-8"));
    classify = (x) => classifyMlp(mlp, x);
  } else {
    console.error(`unknown model ${model} (expected rule or mlp)`);
    return 2;
  }
  try {
    const running = await startServer({ port, classify });
    console.log(`listening on 127.0.0.1:${running.port}`);
    return await new Promise<number>(() => {
      // serve until terminated
    });
  } catch (err) {
    console.error(`cannot bind port ${port}: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

async function main(): Promise<number> {
  const argv = process.argv.slice(2);
  if (argv[0] === "train") {
    return runTrain(argv.slice(1));
  }
  return runServe(argv);
}

main().then(
  (code) => {
    if (code !== 0) {
      process.exit(code);
    }
  },
  (err) => {
    console.error(err instanceof Error ? err.message : String(err));
    process.exit(2);
  },
);
