/**
 * TCP server speaking the classifier wire protocol: one JSON object per
 * line, UTF-8.  Requests are answered in arrival order; a malformed line
 * yields an error object (with the request id when one could be parsed, 0
 * otherwise) and the connection stays open.  One connection is served at a
 * time; the listener keeps accepting after a client disconnects.
 */

import * as net from "net";

import { Verdict } from "./rule";

export type ClassifyFn = (features: number[]) => Verdict;

export interface ServerConfig {
  port: number; // 0 picks an ephemeral port
  host?: string;
  classify: ClassifyFn;
}

export interface RunningServer {
  port: number;
  close(): Promise<void>;
}

export function handleLine(classify: ClassifyFn, line: string): string {
  let id = 0;
  try {
    const req = JSON.parse(line) as { id?: unknown; features?: unknown };
    if (typeof req !== "object" || req === null) {
      throw new Error("request is not an object");
    }
    if (typeof req.id === "number" && Number.isInteger(req.id) && req.id >= 0) {
      id = req.id;
    } else {
      throw new Error("missing or invalid id");
    }
    if (!Array.isArray(req.features) || req.features.some((v) => typeof v !== "number" || !Number.isFinite(v))) {
      throw new Error("missing or invalid features");
    }
    const verdict = classify(req.features as number[]);
    return JSON.stringify({ id, label: verdict.label, score: verdict.score });
  } catch (err) {
    const message = err instanceof Error ? err.message : String(err);
    return JSON.stringify({ id, error: message });
  }
}

export function startServer(config: ServerConfig): Promise<RunningServer> {
  const host = config.host ?? "127.0.0.1";
  const server = net.createServer({ noDelay: true }, (socket) => {
    let buffer = "";
    socket.setEncoding("utf-8");
    socket.on("data", (chunk: string) => {
      buffer += chunk;
      let newline = buffer.indexOf("\n");
      while (newline >= 0) {
        const line = buffer.slice(0, newline).trim();
        buffer = buffer.slice(newline + 1);
        if (line.length > 0) {
          socket.write(handleLine(config.classify, line) + "\n");
        }
        newline = buffer.indexOf("\n");
      }
    });
    socket.on("error", () => {
      socket.destroy();
    });
  });
  server.maxConnections = 1;

  return new Promise((resolve, reject) => {
    server.once("error", reject);
    server.listen(config.port, host, () => {
      const address = server.address() as net.AddressInfo;
      resolve({
        port: address.port,
        close: () =>
          new Promise<void>((done) => {
            server.close(() => done());
          }),
      });
    });
  });
}
