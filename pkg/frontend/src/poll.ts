/** Poll a job every second until it reaches a terminal state. */

import type { Client, JobStatus } from "./api.js";

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

export async function pollJob(
  client: Client,
  jobId: string,
  intervalMs = 1000,
  timeoutMs = 120_000,
): Promise<JobStatus> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    const job = await client.getJob(jobId);
    if (job.state === "succeeded") {
      return job;
    }
    if (job.state === "failed") {
      throw new Error(job.error ?? `job ${jobId} failed`);
    }
    if (Date.now() > deadline) {
      throw new Error(`job ${jobId} timed out (still ${job.state})`);
    }
    await sleep(intervalMs);
  }
}
