import * as net from "net";

import { afterEach, describe, expect, it } from "vitest";

import { classifyRule, makeRuleModel } from "../src/rule";
import { RunningServer, handleLine, startServer } from "../src/server";

const PLANTED = { lo: [0.4, 0.0, 0.15], hi: [0.5, 1.0, 0.25] };
const RULE = makeRuleModel(1, [PLANTED]);

let running: RunningServer | undefined;

afterEach(async () => {
  if (running) {
    await running.close();
    running = undefined;
  }
});

class LineClient {
  private socket: net.Socket;
  private buffer = "";
  private pending: Array<(line: string) => void> = [];

  private constructor(socket: net.Socket) {
    this.socket = socket;
    socket.setEncoding("utf-8");
    socket.on("data", (chunk: string) => {
      this.buffer += chunk;
      let i = this.buffer.indexOf("\n");
      while (i >= 0) {
        const line = this.buffer.slice(0, i);
        this.buffer = this.buffer.slice(i + 1);
        const resolve = this.pending.shift();
        if (resolve) {
          resolve(line);
        }
        i = this.buffer.indexOf("\n");
      }
    });
  }

  static connect(port: number): Promise<LineClient> {
    return new Promise((resolve, reject) => {
      const socket = net.createConnection({ host: "127.0.0.1", port }, () =>
        resolve(new LineClient(socket)),
      );
      socket.once("error", reject);
    });
  }

  send(raw: string): Promise<string> {
    const reply = new Promise<string>((resolve) => this.pending.push(resolve));
    this.socket.write(raw + "\n");
    return reply;
  }

  close(): void {
    this.socket.end();
  }
}

describe("wire protocol server", () => {
  it("answers rule-model requests like the in-process rule", async () => {
    running = await startServer({ port: 0, classify: (x) => classifyRule(RULE, x) });
    const client = await LineClient.connect(running.port);
    const inBox = JSON.parse(await client.send(JSON.stringify({ id: 7, features: [0.45, 0.2, 0.2] })));
    expect(inBox).toEqual({ id: 7, label: 0, score: classifyRule(RULE, [0.45, 0.2, 0.2]).score });
    const outside = JSON.parse(await client.send(JSON.stringify({ id: 8, features: [0.9, 0.2, 0.2] })));
    expect(outside.label).toBe(1);
    client.close();
  });

  it("echoes request ids", async () => {
    running = await startServer({ port: 0, classify: (x) => classifyRule(RULE, x) });
    const client = await LineClient.connect(running.port);
    const reply = JSON.parse(await client.send(JSON.stringify({ id: 42, features: [0.1, 0.1, 0.1] })));
    expect(reply.id).toBe(42);
    client.close();
  });

  it("answers a malformed line with an error object and keeps the connection", async () => {
    running = await startServer({ port: 0, classify: (x) => classifyRule(RULE, x) });
    const client = await LineClient.connect(running.port);
    const error = JSON.parse(await client.send("{this is not json"));
    expect(error.id).toBe(0);
    expect(typeof error.error).toBe("string");
    const afterwards = JSON.parse(await client.send(JSON.stringify({ id: 9, features: [0.45, 0.2, 0.2] })));
    expect(afterwards).toMatchObject({ id: 9, label: 0 });
    client.close();
  });

  it("uses the parsed id in error objects when available", () => {
    const reply = JSON.parse(handleLine((x) => classifyRule(RULE, x), '{"id": 5, "features": "nope"}'));
    expect(reply).toMatchObject({ id: 5 });
    expect(typeof reply.error).toBe("string");
  });

  it("handles requests split across TCP chunks", async () => {
    running = await startServer({ port: 0, classify: (x) => classifyRule(RULE, x) });
    const socket = net.createConnection({ host: "127.0.0.1", port: running.port });
    await new Promise<void>((resolve) => socket.once("connect", () => resolve()));
    const whole = JSON.stringify({ id: 3, features: [0.45, 0.2, 0.2] }) + "\n";
    const reply = new Promise<string>((resolve) => {
      let buf = "";
      socket.setEncoding("utf-8");
      socket.on("data", (chunk: string) => {
        buf += chunk;
        if (buf.includes("\n")) {
          resolve(buf.trim());
        }
      });
    });
    socket.write(whole.slice(0, 10));
    await new Promise((r) => setTimeout(r, 20));
    socket.write(whole.slice(10));
    expect(JSON.parse(await reply)).toMatchObject({ id: 3, label: 0 });
    socket.end();
  });

  it("accepts a new connection after the previous client disconnects", async () => {
    running = await startServer({ port: 0, classify: (x) => classifyRule(RULE, x) });
    const first = await LineClient.connect(running.port);
    first.close();
    await new Promise((r) => setTimeout(r, 20));
    const second = await LineClient.connect(running.port);
    const reply = JSON.parse(await second.send(JSON.stringify({ id: 1, features: [0.1, 0.1, 0.1] })));
    expect(reply.id).toBe(1);
    second.close();
  });
});
